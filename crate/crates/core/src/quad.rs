//! Adaptive Gauss–Kronrod quadrature (7-point Gauss embedded in 15-point Kronrod).

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Subinterval budget for one call. Integrands whose error estimate is
/// dominated by rounding noise stop here instead of splitting forever.
const MAX_PANELS: usize = 4000;

/// `(value, error estimate, ∫|f|)` on one panel.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(center - dx), f(center + dx));
        kron += WGK[j] * (lo + hi);
        abs += WGK[j] * (lo.abs() + hi.abs());
        // Gauss nodes sit at the odd Kronrod indices.
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    (kron * half, ((kron - gauss) * half).abs(), abs * half.abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (value, err, abs) = kronrod(f, a, b);
    Panel {
        a,
        b,
        value,
        err,
        abs,
    }
}

/// Integrate `f` over `[a, b]` to the requested absolute tolerance.
///
/// Globally adaptive: the panel with the largest error is split until the
/// summed error meets `abs_tol` or sits at the rounding floor of `∫|f|`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    integrate_panels(f, a, b, 1, abs_tol)
}

/// Integrate by splitting `[a, b]` into `pieces` equal panels first.
///
/// Used for oscillatory integrands where one panel would under-resolve
/// the initial error estimate. The tolerance applies to the whole sum.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    abs_tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut heap: std::collections::BinaryHeap<Panel> = (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + h };
            panel(&f, lo, hi)
        })
        .collect();
    let mut err: f64 = heap.iter().map(|p| p.err).sum();
    let mut abs: f64 = heap.iter().map(|p| p.abs).sum();
    let budget = pieces + MAX_PANELS;
    while heap.len() < budget && err > abs_tol.max(50.0 * f64::EPSILON * abs) {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            heap.push(worst);
            break;
        }
        let (l, r) = (panel(&f, worst.a, mid), panel(&f, mid, worst.b));
        err += l.err + r.err - worst.err;
        abs += l.abs + r.abs - worst.abs;
        heap.push(l);
        heap.push(r);
    }
    heap.iter().map(|p| p.value).sum()
}
