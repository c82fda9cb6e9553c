fn main() {
    // placeholder during scaffolding
}
