//! Adaptive Gauss–Kronrod (7/15) integration and the Beta kernel integral.
//!
//! Backs the BetaPower CDF helper and the moment oracles in tests. Does not
//! use the log-Gamma routines in [`crate::dist_core`].

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 48;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= MAX_DEPTH || b - a <= f64::EPSILON * a.abs().max(b.abs()) {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth + 1) + adapt(f, mid, b, 0.5 * tol, depth + 1)
}

/// Integrates `f` over `[a, b]` to an absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_panels(&f, a, b, tol, 1)
}

/// Like [`integrate`], but first splits `[a, b]` into `panels` equal pieces so
/// that narrow features cannot slip between the initial nodes.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let tol_each = tol / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            adapt(f, lo, hi, tol_each, 0)
        })
        .sum()
}

const PANELS: usize = 32;

/// `∫_lo^hi x^(a-1) (1-x)^(b-1) dx` scaled by `exp(-log_scale)`, where
/// `log_scale` is chosen internally and returned alongside the value, so
/// ratios of integrals with the same `(a, b)` are exact in the scale.
///
/// Endpoint singularities (`a < 1` or `b < 1`) are removed with the
/// substitution `x = u^(1/a)` on the half of `[0, 1]` that contains them.
pub fn beta_kernel_integral(a: f64, b: f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    assert!(a > 0.0 && b > 0.0, "beta kernel needs positive shapes");
    let lo = lo.clamp(0.0, 1.0);
    let hi = hi.clamp(0.0, 1.0);
    if hi <= lo {
        return (0.0, 0.0);
    }
    let log_scale = if a >= 1.0 && b >= 1.0 && a + b > 2.0 {
        let mode = (a - 1.0) / (a + b - 2.0);
        log_kernel(a, b, mode)
    } else {
        0.0
    };
    let mut total = 0.0;
    if lo < 0.5 {
        total += left_half(a, b, lo, hi.min(0.5), log_scale, tol);
    }
    if hi > 0.5 {
        // Reflect x -> 1 - x so the right half becomes a left half.
        total += left_half(b, a, 1.0 - hi, 1.0 - lo.max(0.5), log_scale, tol);
    }
    (total, log_scale)
}

fn log_kernel(a: f64, b: f64, x: f64) -> f64 {
    let lx = if a == 1.0 { 0.0 } else { (a - 1.0) * x.ln() };
    let l1x = if b == 1.0 { 0.0 } else { (b - 1.0) * (-x).ln_1p() };
    lx + l1x
}

// ∫_lo^hi x^(a-1)(1-x)^(b-1) dx for 0 <= lo < hi <= 1/2.
fn left_half(a: f64, b: f64, lo: f64, hi: f64, log_scale: f64, tol: f64) -> f64 {
    if a >= 1.0 {
        let f = |x: f64| {
            if x <= 0.0 && a > 1.0 {
                0.0
            } else {
                (log_kernel(a, b, x) - log_scale).exp()
            }
        };
        integrate_panels(&f, lo, hi, tol, PANELS)
    } else {
        // x = u^(1/a): x^(a-1) dx = du / a.
        let inv = 1.0 / a;
        let g = |u: f64| {
            let x = u.powf(inv);
            let l1x = if b == 1.0 { 0.0 } else { (b - 1.0) * (-x).ln_1p() };
            (l1x - log_scale).exp()
        };
        integrate_panels(&g, lo.powf(a), hi.powf(a), tol * a, PANELS) * inv
    }
}
