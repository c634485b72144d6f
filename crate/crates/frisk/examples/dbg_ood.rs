//! Scratch: OOD solve calibration on the enlarged domain.

use std::time::Instant;

use frisk::family::ood_drift;
use frisk::grid::{Grid, GridDim};
use frisk::solver::solve_safety;
use frisk::stable::{SpectralAtom, StableParams, SubordinatorParams};
use frisk::system::{Barrier, DriftSpec, SafeSet, SigmaSpec, SystemSpec};

fn ood_system() -> (SystemSpec, SafeSet) {
    let atoms = vec![
        SpectralAtom::new(vec![1.0, 0.0], 0.25),
        SpectralAtom::new(vec![-1.0, 0.0], 0.25),
        SpectralAtom::new(vec![0.0, 1.0], 0.25),
        SpectralAtom::new(vec![0.0, -1.0], 0.25),
    ];
    let stable = StableParams::new(1.5, atoms).unwrap();
    let sys = SystemSpec::new(
        DriftSpec::Coeffs(ood_drift()),
        SigmaSpec::Constant(0.2),
        stable,
        SubordinatorParams::new(0.7).unwrap(),
    )
    .unwrap();
    let safe = SafeSet::new(Barrier::BelowAll { hi: vec![1.0, 1.0] }).unwrap();
    (sys, safe)
}

// Frozen MC references (N = 4e4, ds = 5e-4, stream 4242 "dbg-ood-fixed").
const PROBES: [([f64; 2], f64, f64); 6] = [
    ([0.5, 0.5], 16.0 / 33.0, 0.4672),
    ([0.2, 0.8], 1.0, 0.8830),
    ([0.9, 0.3], 9.0 / 33.0, 0.0383),
    ([0.05, 0.05], 1.0, 0.9390),
    ([0.5, 0.05], 1.0, 0.7926),
    ([0.5, 0.5], 1.0, 0.4082),
];

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let per_unit: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(33);
    let steps: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(33);
    let (sys, safe) = ood_system();
    let grid = Grid::new_2d(
        GridDim::new(-2.0, 1.0, 3 * per_unit).unwrap(),
        GridDim::new(-4.0, 1.0, 5 * per_unit).unwrap(),
    )
    .unwrap();
    let t_grid = [9.0 / 33.0, 16.0 / 33.0, 1.0];
    let dt = 1.0 / steps as f64;
    let start = Instant::now();
    let field = solve_safety(&sys, &grid, &safe, &t_grid, dt).unwrap();
    println!(
        "h=1/{per_unit} dt=1/{steps}: solve {}s",
        start.elapsed().as_secs()
    );
    for (x, t, mc) in PROBES {
        let ti = t_grid.iter().position(|&v| (v - t).abs() < 1e-12).unwrap();
        let floor = field.at_point(&x, ti).unwrap();
        let lerp = field.at_point_lerp(&x, ti).unwrap();
        println!(
            "  x=({:.2},{:.2}) T={:.3}: floor={:.4} lerp={:.4} mc={:.4} dfloor={:+.4} dlerp={:+.4}",
            x[0],
            x[1],
            t,
            floor,
            lerp,
            mc,
            floor - mc,
            lerp - mc
        );
    }
}
