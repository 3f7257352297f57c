//! Globally adaptive Gauss–Kronrod quadrature (21-point rule with interval
//! bisection). Improper endpoints are handled by the callers through the
//! interval chart, so only finite segments reach this module.

/// 10-point Gauss / 21-point Kronrod abscissae on [0, 1] side of the interval.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 21-point Kronrod evaluation on [a, b]: (value, error estimate).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let i = 2 * j + 1;
        let absc = half * XGK[i];
        let f1 = f(center - absc);
        let f2 = f(center + absc);
        fv1[i] = f1;
        fv2[i] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[i] * (f1 + f2);
        resabs += WGK[i] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let i = 2 * j;
        let absc = half * XGK[i];
        let f1 = f(center - absc);
        let f2 = f(center + absc);
        fv1[i] = f1;
        fv2[i] = f2;
        resk += WGK[i] * (f1 + f2);
        resabs += WGK[i] * (f1.abs() + f2.abs());
    }

    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for i in 0..10 {
        resasc += WGK[i] * ((fv1[i] - reskh).abs() + (fv2[i] - reskh).abs());
    }

    let value = resk * half;
    let err = rescale_error(
        (resk - resg) * half,
        resabs * half.abs(),
        resasc * half.abs(),
    );
    (value, err)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub segments: usize,
}

impl QuadResult {
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_err
        } else {
            self.abs_err / self.value.abs()
        }
    }
}

/// Integrate `f` from `a` to `b` (either orientation) bisecting the worst
/// segment until the summed error estimate meets the tolerance or the segment
/// budget is exhausted. Always returns the best estimate with its error;
/// callers decide whether to accept it.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_err: 0.0,
            segments: 0,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk21(&f, lo, hi);
    segs.push((lo, hi, v, e));

    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || segs.len() >= max_segments {
            return QuadResult {
                value: sign * total,
                abs_err: err,
                segments: segs.len(),
            };
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .3.partial_cmp(&q.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (sa, sb, _, _) = segs.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            // interval too small to split; keep it and stop refining
            let (v, e) = gk21(&f, sa, sb);
            segs.push((sa, sb, v, 0.9 * e));
            continue;
        }
        let (v1, e1) = gk21(&f, sa, mid);
        let (v2, e2) = gk21(&f, mid, sb);
        segs.push((sa, mid, v1, e1));
        segs.push((mid, sb, v2, e2));
    }
}

/// Default tolerances used for profile construction: target 1e-12 relative,
/// accept 1e-10.
pub const REL_TARGET: f64 = 1e-12;
pub const REL_ACCEPT: f64 = 1e-10;
