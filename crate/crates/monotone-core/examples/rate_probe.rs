use monotone_core::datagen;

fn main() {
    for n in [3usize, 5, 7] {
        let start = std::time::Instant::now();
        let per_class = if n == 7 { 40 } else { 400 };
        let d = datagen::generate_balanced(n, per_class, 99, 1, u64::MAX).unwrap();
        let rate = per_class as f64 / d.meta.attempts as f64;
        println!(
            "n={n}: {} monotone in {} attempts, rate {:.3e}, {:?}",
            per_class,
            d.meta.attempts,
            rate,
            start.elapsed()
        );
    }
}
