fn main() {
    println!("dtnlab CLI placeholder");
}
