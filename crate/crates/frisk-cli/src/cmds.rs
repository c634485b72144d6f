//! Subcommand implementations. Each returns Ok(true) on success, Ok(false)
//! when a tolerance gate fails, and Err for config or I/O problems; the
//! final stdout line of every command is a machine-parseable summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::Rng;

use frisk::dataset::{generate_dataset, read_dataset, DatasetSpec};
use frisk::family::{ood_drift, ood_solve_grid};
use frisk::mc::{mc_grid, mc_safety, McConfig};
use frisk::rng::RngStream;
use frisk::solver::{solve_recovery, solve_safety, RiskField, RiskKind};
use frisk::stable::{StableParams, StableSampler, SubordinatorParams};
use frisk::system::{DriftSpec, SafeSet, SigmaSpec, SystemSpec};

use crate::config::RunConfig;

fn write_out(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Draws n samples from the 1D standard stable law S(alpha, skew) and
/// reports moments of the realized stream.
pub fn sample_stable(alpha: f64, skew: f64, n: u64, seed: u64, out: Option<PathBuf>) -> Result<bool> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    if !(-1.0..=1.0).contains(&skew) {
        bail!("--skew must lie in [-1, 1], got {skew}");
    }
    let sampler = StableSampler::new(alpha, skew)?;
    let mut rng = RngStream::new(seed).named("sample-stable").rng();
    let mut csv = String::with_capacity(16 * n as usize + 16);
    csv.push_str("draw\n");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let x = sampler.sample(&mut rng);
        writeln!(csv, "{x}").unwrap();
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / n as f64;
    let var = if n > 1 {
        (sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)
    } else {
        f64::NAN
    };
    let dest = match &out {
        Some(path) => {
            write_out(path, &csv)?;
            path.display().to_string()
        }
        None => {
            print!("{csv}");
            "-".to_string()
        }
    };
    println!(
        "[sample-stable] alpha={alpha} skew={skew} n={n} seed={seed} mean={mean} var={var} out={dest}"
    );
    Ok(true)
}

fn points_csv(points: &[(Vec<f64>, f64, Vec<f64>)], value_cols: &str) -> String {
    let dim = points.first().map_or(1, |(x, _, _)| x.len());
    let mut csv = String::new();
    match dim {
        1 => writeln!(csv, "x,T,{value_cols}").unwrap(),
        _ => writeln!(csv, "x1,x2,T,{value_cols}").unwrap(),
    }
    for (x, t, vals) in points {
        for c in x {
            write!(csv, "{c},").unwrap();
        }
        write!(csv, "{t}").unwrap();
        for v in vals {
            write!(csv, ",{v}").unwrap();
        }
        csv.push('\n');
    }
    csv
}

fn field_points(field: &RiskField) -> Vec<(Vec<f64>, f64, Vec<f64>)> {
    let grid = field.grid();
    let dim = grid.dim();
    let mut points = Vec::with_capacity(field.t_grid().len() * field.cells().len());
    for (ti, &t) in field.t_grid().iter().enumerate() {
        for (row, &cell) in field.cells().iter().enumerate() {
            let mut x = vec![0.0; dim];
            grid.center(cell, &mut x);
            points.push((x, t, vec![field.values()[ti][row]]));
        }
    }
    points
}

fn solve_field(cfg: &RunConfig, kind: RiskKind) -> Result<RiskField> {
    let sys = cfg.system_spec()?;
    let safe = cfg.safe_set()?;
    let grid = cfg.grid()?;
    let horizons = cfg.horizons()?;
    let dt = cfg.solver()?.dt;
    Ok(match kind {
        RiskKind::Safety => solve_safety(&sys, &grid, &safe, horizons, dt)?,
        RiskKind::Recovery => solve_recovery(&sys, &grid, &safe, horizons, dt)?,
    })
}

pub fn mc_risk(config: &Path) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let kind = cfg.kind()?;
    let sys = cfg.system_spec()?;
    let safe = cfg.safe_set()?;
    let mc = cfg.mc()?;
    if mc.starts.is_empty() {
        bail!("mc-risk needs mc.starts in the config");
    }
    let horizons = cfg.horizons()?;
    let stream = RngStream::new(mc.seed).named("mc-risk");
    let table = mc_grid(&sys, &safe, kind, &mc.starts, horizons, &mc.mc_config(), &stream)?;
    let out = cfg.out_dir()?.join("mc.csv");
    write_out(&out, &table.to_csv())?;
    println!(
        "[mc-risk] kind={} n_starts={} n_horizons={} n_paths={} bias_bound={} out={}",
        kind_name(kind),
        mc.starts.len(),
        horizons.len(),
        mc.n_paths,
        table.bias_bound,
        out.display()
    );
    Ok(true)
}

fn kind_name(kind: RiskKind) -> &'static str {
    match kind {
        RiskKind::Safety => "safety",
        RiskKind::Recovery => "recovery",
    }
}

pub fn solve_pde(config: &Path, kind_flag: Option<RiskKind>) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let kind = match kind_flag {
        Some(k) => k,
        None => cfg.kind()?,
    };
    let field = solve_field(&cfg, kind)?;
    let out = cfg.out_dir()?.join("pde.csv");
    write_out(&out, &points_csv(&field_points(&field), "value"))?;
    println!(
        "[solve-pde] kind={} cells={} horizons={} dt={} out={}",
        kind_name(kind),
        field.cells().len(),
        field.t_grid().len(),
        field.dt,
        out.display()
    );
    Ok(true)
}

/// Cross-validates the PDE field against the MC oracle at selected starts.
/// The gate fails when any |PDE - MC| exceeds max(tolerance_abs, ci_mult * CI).
pub fn compare(config: &Path) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let kind = cfg.kind()?;
    let Some(cmp) = cfg.compare.clone() else {
        bail!("compare needs a compare section in the config");
    };
    let field = solve_field(&cfg, kind)?;

    let starts: Vec<Vec<f64>> = if !cmp.starts.is_empty() {
        cmp.starts.clone()
    } else if let Some(stride) = cmp.stride {
        if stride == 0 {
            bail!("compare.stride must be >= 1");
        }
        let grid = field.grid();
        let dim = grid.dim();
        field
            .cells()
            .iter()
            .step_by(stride)
            .map(|&cell| {
                let mut x = vec![0.0; dim];
                grid.center(cell, &mut x);
                x
            })
            .collect()
    } else {
        bail!("compare needs either compare.starts or compare.stride");
    };

    let sys = cfg.system_spec()?;
    let safe = cfg.safe_set()?;
    let mc = cfg.mc()?;
    let horizons = cfg.horizons()?;
    let stream = RngStream::new(mc.seed).named("compare");
    let table = mc_grid(&sys, &safe, kind, &starts, horizons, &mc.mc_config(), &stream)?;

    let mut rows = Vec::with_capacity(table.points.len());
    let mut max_abs_diff: f64 = 0.0;
    let mut within_ci = 0usize;
    let mut pass = true;
    for p in &table.points {
        let ti = horizons
            .iter()
            .position(|&t| t == p.t)
            .expect("mc table horizon comes from the config");
        let pde = field.at_point(&p.x, ti)?;
        let diff = pde - p.est.p;
        max_abs_diff = max_abs_diff.max(diff.abs());
        let ci = p.est.half_width();
        if diff.abs() <= cmp.ci_mult * ci {
            within_ci += 1;
        }
        if diff.abs() > cmp.tolerance_abs.max(cmp.ci_mult * ci) {
            pass = false;
        }
        rows.push((
            p.x.clone(),
            p.t,
            vec![p.est.p, p.est.ci_low, p.est.ci_high, pde, diff],
        ));
    }
    let out = cfg.out_dir()?.join("compare.csv");
    write_out(&out, &points_csv(&rows, "mc,ci_low,ci_high,pde,diff"))?;
    let frac = within_ci as f64 / rows.len().max(1) as f64;
    println!(
        "[compare] kind={} points={} max_abs_diff={max_abs_diff} frac_within_ci={frac} tol_abs={} ci_mult={} pass={pass} out={}",
        kind_name(kind),
        rows.len(),
        cmp.tolerance_abs,
        cmp.ci_mult,
        out.display()
    );
    Ok(pass)
}

pub fn gen_dataset(config: &Path) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let ds = cfg.dataset()?;
    if ds.n_t == 0 {
        bail!("dataset.n_t must be >= 1");
    }
    let dt = ds.t_max / ds.n_t as f64;
    let spec = DatasetSpec {
        family: ds.family.clone().unwrap_or_default(),
        n_samples: ds.n_samples,
        grid: cfg.grid()?,
        t_grid: (1..=ds.n_t).map(|k| k as f64 * dt).collect(),
        dt,
        stable: StableParams::new(cfg.system.alpha, cfg.system.atoms.clone())?,
        sub: SubordinatorParams::new(cfg.system.beta)?,
        sigma: cfg.system.sigma,
        safe: cfg.safe_set()?,
        seed: ds.seed,
        train_fraction: ds.train_fraction,
    };
    let out = cfg.out_dir()?.join("data.frsk1");
    let manifest = generate_dataset(&spec, &out)?;
    println!(
        "[gen-dataset] samples={} failed={} train={} test={} digest={} out={}",
        manifest.n_samples,
        manifest.n_failed(),
        manifest.train.len(),
        manifest.test.len(),
        manifest.payload_sha256,
        out.display()
    );
    Ok(true)
}

pub struct OodEvalOptions {
    pub dataset: PathBuf,
    pub n_paths: u64,
    pub ds: f64,
    pub points: usize,
    pub resolution: usize,
    pub seed: u64,
    pub tol_abs: f64,
    pub ci_mult: f64,
    pub out: PathBuf,
}

/// Solves the fixed out-of-distribution system and spot-checks the field
/// against fresh MC runs at random (x, T) points inside the dataset window.
/// The solve runs on the enlarged OOD domain: the drift recirculates through
/// the region below and left of the unit square, so truncating the solve at
/// the dataset boundary misstates the safety values by O(1).
pub fn ood_eval(opt: &OodEvalOptions) -> Result<bool> {
    if opt.points == 0 {
        bail!("--points must be at least 1");
    }
    if opt.resolution == 0 {
        bail!("--resolution must be at least 1");
    }
    let (manifest, _) = read_dataset(&opt.dataset)?;
    if manifest.kind != RiskKind::Safety {
        bail!("ood-eval expects a safety dataset");
    }
    let sys = SystemSpec::new(
        DriftSpec::Coeffs(ood_drift()),
        SigmaSpec::Constant(manifest.sigma),
        StableParams::new(manifest.alpha, manifest.atoms.clone())?,
        SubordinatorParams::new(manifest.beta)?,
    )?;
    let safe = SafeSet::new(manifest.barrier.clone())?;
    let grid = ood_solve_grid(opt.resolution)?;
    let field = solve_safety(&sys, &grid, &safe, &manifest.t_grid, manifest.dt)?;

    let stream = RngStream::new(opt.seed).named("ood-eval");
    let mut pick = stream.named("points").rng();
    let mcfg = McConfig {
        n_paths: opt.n_paths,
        ds: opt.ds,
        ..Default::default()
    };
    let dim = manifest.grid.dim();
    let mut rows = Vec::with_capacity(opt.points);
    let mut max_abs_diff: f64 = 0.0;
    let mut passed = 0usize;
    for k in 0..opt.points {
        let mut x = vec![0.0; dim];
        for (d, v) in x.iter_mut().enumerate() {
            let gd = manifest.grid.dims()[d];
            *v = pick.gen_range(gd.lo..gd.hi);
        }
        let ti = pick.gen_range(0..field.t_grid().len());
        let t = field.t_grid()[ti];
        let est = mc_safety(&sys, &safe, &x, &[t], &mcfg, &stream.child(k as u64))?[0];
        let pde = field.at_point_lerp(&x, ti)?;
        let diff = pde - est.p;
        let tol = opt.tol_abs.max(opt.ci_mult * est.half_width());
        let ok = diff.abs() <= tol;
        passed += usize::from(ok);
        max_abs_diff = max_abs_diff.max(diff.abs());
        rows.push((
            x,
            t,
            vec![est.p, est.ci_low, est.ci_high, pde, diff, f64::from(u8::from(ok))],
        ));
    }
    write_out(&opt.out, &points_csv(&rows, "mc,ci_low,ci_high,pde,diff,pass"))?;
    let pass = passed == opt.points;
    println!(
        "[ood-eval] checks={} passed={passed} max_abs_diff={max_abs_diff} tol_abs={} ci_mult={} pass={pass} out={}",
        opt.points,
        opt.tol_abs,
        opt.ci_mult,
        opt.out.display()
    );
    Ok(pass)
}
