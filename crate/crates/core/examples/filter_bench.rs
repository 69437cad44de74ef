use std::time::Instant;

use triplane_core::filter::{filter_bilateral, filter_bilateral_reference, KernelSpec};
use triplane_core::plane::Plane;
use triplane_core::rng::Rng;

fn main() {
    let mut rng = Rng::new(256);
    let plane = Plane::from_fn(256, 4, |_, _, _| rng.range(-1.0, 1.0));
    let spec = KernelSpec::bilateral(9);
    let mut fast = f64::INFINITY;
    let mut slow = f64::INFINITY;
    for _ in 0..3 {
        let t = Instant::now();
        let _ = filter_bilateral(&plane, &spec).unwrap();
        fast = fast.min(t.elapsed().as_secs_f64());
        let t = Instant::now();
        let _ = filter_bilateral_reference(&plane, &spec).unwrap();
        slow = slow.min(t.elapsed().as_secs_f64());
    }
    println!(
        "fast {:.1} ms  slow {:.1} ms  speedup {:.2}x",
        fast * 1e3,
        slow * 1e3,
        slow / fast
    );
}
