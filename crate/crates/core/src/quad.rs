//! Quadrature building blocks: the 7/15-point Gauss–Kronrod pair, Gauss–Jacobi
//! rules for algebraic endpoint weights, a global adaptive panel driver, and a
//! bracketed Newton solver for monotone maps.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
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

/// Result of one panel rule.
#[derive(Debug, Clone, Copy)]
pub struct PanelEstimate {
    pub value: Complex64,
    pub err: f64,
    /// Estimate of ∫|f| over the panel.
    pub resabs: f64,
}

/// 15-point Kronrod value on [a, b]. The error estimate scales |K15 − G7|
/// the way QUADPACK's `qk15` does, with a floor at the rounding level.
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> PanelEstimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [Complex64::new(0.0, 0.0); 15];
    fv[7] = f(c);
    for k in 0..7 {
        let dx = h * XGK[k];
        fv[k] = f(c - dx);
        fv[14 - k] = f(c + dx);
    }
    let mut kron = fv[7] * WGK[7];
    let mut gauss = fv[7] * WG[3];
    let mut resabs = fv[7].norm() * WGK[7];
    for k in 0..7 {
        let s = fv[k] + fv[14 - k];
        kron += s * WGK[k];
        resabs += (fv[k].norm() + fv[14 - k].norm()) * WGK[k];
        if k % 2 == 1 {
            gauss += s * WG[k / 2];
        }
    }
    let mean = kron * 0.5;
    let mut resasc = WGK[7] * (fv[7] - mean).norm();
    for k in 0..7 {
        resasc += WGK[k] * ((fv[k] - mean).norm() + (fv[14 - k] - mean).norm());
    }
    let hh = h.abs();
    let resasc = resasc * hh;
    let resabs = resabs * hh;
    let mut err = ((kron - gauss) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    err = err.max(50.0 * f64::EPSILON * resabs);
    PanelEstimate {
        value: kron * h,
        err,
        resabs,
    }
}

/// [`gk15`] for a real integrand.
pub fn gk15_real<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> PanelEstimate {
    let mut g = |x: f64| Complex64::new(f(x), 0.0);
    gk15(&mut g, a, b)
}

/// Gauss rule for ∫_0^1 y^β f(y) dy.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    /// Golub–Welsch on the Jacobi matrix of the weight (1+x)^β on [−1, 1], mapped to [0, 1].
    pub fn new(n: usize, beta: f64) -> Result<JacobiRule> {
        if n == 0 || !(beta > -1.0) || !beta.is_finite() {
            return Err(domain(format!("invalid Jacobi rule n={n}, beta={beta}")));
        }
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let diag = if k == 0 {
                beta / (beta + 2.0)
            } else {
                beta * beta / ((2.0 * kf + beta) * (2.0 * kf + beta + 2.0))
            };
            jm[(k, k)] = diag;
            if k + 1 < n {
                let m = kf + 1.0;
                let s = 2.0 * m + beta;
                let b = 4.0 * m * m * (m + beta) * (m + beta) / (s * s * (s + 1.0) * (s - 1.0));
                jm[(k, k + 1)] = b.sqrt();
                jm[(k + 1, k)] = b.sqrt();
            }
        }
        let eig = SymmetricEigen::new(jm);
        let mu0 = 2f64.powf(beta + 1.0) / (beta + 1.0);
        let scale = 2f64.powf(-beta - 1.0);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let v0 = eig.eigenvectors[(0, k)];
                ((1.0 + eig.eigenvalues[k]) * 0.5, mu0 * v0 * v0 * scale)
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(JacobiRule {
            beta,
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// Shared rule from a process-wide cache.
    pub fn cached(n: usize, beta: f64) -> Result<Arc<JacobiRule>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<JacobiRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (n, beta.to_bits());
        if let Some(rule) = cache.lock().unwrap().get(&key) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(JacobiRule::new(n, beta)?);
        cache.lock().unwrap().insert(key, rule.clone());
        Ok(rule)
    }

    /// ∫_0^h x^β f(x) dx; `f` receives the offset x ∈ (0, h).
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, h: f64, f: &mut F) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for (y, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(h * y);
            acc += v * *w;
            abs += v.norm() * w;
        }
        let scale = h.powf(self.beta + 1.0);
        (acc * scale, abs * scale)
    }

    pub fn integrate_real<F: FnMut(f64) -> f64>(&self, h: f64, f: &mut F) -> f64 {
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(y, w)| w * f(h * y)).sum();
        s * h.powf(self.beta + 1.0)
    }
}

/// Checks a Jacobi rule against the exact moments ∫_0^1 y^{β+k} dy.
#[allow(dead_code)]
pub(crate) fn jacobi_moment_error(rule: &JacobiRule, k: i32) -> f64 {
    let exact = 1.0 / (rule.beta + 1.0 + k as f64);
    let got: f64 = rule.nodes.iter().zip(&rule.weights).map(|(y, w)| w * y.powi(k)).sum();
    (got - exact).abs() / exact
}

/// How a panel is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelKind {
    Regular,
    /// Carries the algebraic weight (x − a)^β at its left end.
    SingularLeft(f64),
    /// Carries the algebraic weight (b − x)^β at its right end.
    SingularRight(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub kind: PanelKind,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of integrand evaluations.
    pub budget: usize,
    pub what: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOutcome {
    pub value: Complex64,
    pub err: f64,
    pub resabs: f64,
    pub panels: usize,
    pub evals: usize,
}

struct HeapItem(f64, usize);

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal && self.1 == other.1
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Compensated complex summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: Complex64,
    comp: Complex64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: Complex64) {
        let (s_re, c_re) = two_sum(self.sum.re, x.re);
        let (s_im, c_im) = two_sum(self.sum.im, x.im);
        self.sum = Complex64::new(s_re, s_im);
        self.comp += Complex64::new(c_re, c_im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let c = if a.abs() >= b.abs() { (a - s) + b } else { (b - s) + a };
    (s, c)
}

fn split(p: Panel) -> (Panel, Panel) {
    let m = 0.5 * (p.a + p.b);
    let (lk, rk) = match p.kind {
        PanelKind::Regular => (PanelKind::Regular, PanelKind::Regular),
        PanelKind::SingularLeft(b) => (PanelKind::SingularLeft(b), PanelKind::Regular),
        PanelKind::SingularRight(b) => (PanelKind::Regular, PanelKind::SingularRight(b)),
    };
    (
        Panel { a: p.a, b: m, kind: lk },
        Panel { a: m, b: p.b, kind: rk },
    )
}

/// Global adaptive bisection: the panel with the largest error estimate is
/// split until the summed estimate meets `max(abs_tol, rel_tol·∫|f|)`.
///
/// `eval(panel)` returns the panel estimate and the number of evaluations spent.
pub fn adaptive<E>(initial: &[Panel], mut eval: E, spec: AdaptiveSpec) -> Result<AdaptiveOutcome>
where
    E: FnMut(Panel) -> (PanelEstimate, usize),
{
    let mut panels: Vec<(Panel, PanelEstimate)> = Vec::with_capacity(initial.len());
    let mut evals = 0usize;
    let mut err_total = 0.0;
    let mut abs_total = 0.0;
    for &p in initial {
        let (est, n) = eval(p);
        evals += n;
        err_total += est.err;
        abs_total += est.resabs;
        panels.push((p, est));
        if evals > spec.budget {
            return Err(budget_error(&panels, spec, err_total));
        }
    }
    let target = |abs_total: f64| spec.abs_tol.max(spec.rel_tol * abs_total);

    if err_total > target(abs_total) {
        let mut heap: BinaryHeap<HeapItem> =
            panels.iter().enumerate().map(|(i, (_, e))| HeapItem(e.err, i)).collect();
        let mut frozen = 0.0;
        while err_total > target(abs_total) {
            let Some(HeapItem(_, i)) = heap.pop() else {
                return Err(Error::Quadrature {
                    what: spec.what,
                    estimate: err_total,
                    panels: panels.len(),
                });
            };
            let (p, old) = panels[i];
            let m = 0.5 * (p.a + p.b);
            if !(m > p.a && m < p.b) || (p.b - p.a) <= 4.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) {
                frozen += old.err;
                if frozen > target(abs_total) {
                    return Err(Error::Quadrature {
                        what: spec.what,
                        estimate: err_total,
                        panels: panels.len(),
                    });
                }
                continue;
            }
            let (l, r) = split(p);
            let (el, nl) = eval(l);
            let (er, nr) = eval(r);
            evals += nl + nr;
            err_total += el.err + er.err - old.err;
            abs_total += el.resabs + er.resabs - old.resabs;
            panels[i] = (l, el);
            heap.push(HeapItem(el.err, i));
            panels.push((r, er));
            heap.push(HeapItem(er.err, panels.len() - 1));
            if evals > spec.budget {
                return Err(budget_error(&panels, spec, err_total));
            }
        }
        // Refresh the running totals to avoid drift from incremental updates.
        err_total = panels.iter().map(|(_, e)| e.err).sum();
        panels.sort_by(|x, y| x.0.a.total_cmp(&y.0.a));
    }
    let mut sum = NeumaierSum::default();
    for (_, e) in &panels {
        sum.add(e.value);
    }
    Ok(AdaptiveOutcome {
        value: sum.value(),
        err: err_total,
        resabs: abs_total,
        panels: panels.len(),
        evals,
    })
}

fn budget_error(panels: &[(Panel, PanelEstimate)], spec: AdaptiveSpec, err: f64) -> Error {
    let mut sum = NeumaierSum::default();
    for (_, e) in panels {
        sum.add(e.value);
    }
    Error::Budget {
        budget: spec.budget,
        partial: sum.value(),
        estimate: err,
        tol: spec.abs_tol,
    }
}

/// Solves g(x) = target for a monotone g on [lo, hi] by Newton steps
/// safeguarded with bisection. `g` returns (value, derivative).
pub fn solve_monotone<G>(g: G, target: f64, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    G: Fn(f64) -> (f64, f64),
{
    let (glo, _) = g(lo);
    let (ghi, _) = g(hi);
    let increasing = ghi >= glo;
    let f = |x: f64| {
        let (v, d) = g(x);
        if increasing {
            (v - target, d)
        } else {
            (target - v, -d)
        }
    };
    let flo = f(lo).0;
    let fhi = f(hi).0;
    if flo > 0.0 || fhi < 0.0 {
        return None;
    }
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    let (mut a, mut b) = (lo, hi);
    let mut x = lo + (hi - lo) * (-flo / (fhi - flo)).clamp(0.0, 1.0);
    if !(x > a && x < b) {
        x = 0.5 * (a + b);
    }
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if b - a <= xtol {
            return Some(0.5 * (a + b));
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= xtol {
            return Some(next);
        }
        x = next;
    }
    None
}

/// Partition of [a, b] such that a monotone map g changes by at most `step`
/// on each piece. `g` returns (value, derivative).
pub fn level_breaks<G>(g: G, a: f64, b: f64, step: f64) -> Vec<f64>
where
    G: Fn(f64) -> (f64, f64),
{
    let ga = g(a).0;
    let gb = g(b).0;
    let span = gb - ga;
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    out.push(a);
    let xtol = 1e-13 * (b - a);
    for k in 1..n {
        let level = ga + span * (k as f64 / n as f64);
        let lo = *out.last().unwrap();
        if let Some(x) = solve_monotone(&g, level, lo, b, xtol, 100) {
            if x > lo && x < b {
                out.push(x);
            }
        }
    }
    out.push(b);
    out
}
