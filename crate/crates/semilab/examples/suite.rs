fn main() {
    for o in semilab::acceptance::run_all(7) {
        println!("{o}");
    }
}
