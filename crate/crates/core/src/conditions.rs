//! Energy conditions for observers and null frames, radiation conditions,
//! and the vector-field certificates of pp-wave normal forms.
//!
//! Antisymmetrization over `k` slots carries the factor `1/k!`:
//! `X_[ab] = ½ (X_ab − X_ba)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{check_same_chart, LocalGeometry, MetricField, VectorField};
use crate::linalg;
use crate::tensor::{TensorValue, Variance};

use Variance::{Down, Up};

/// Normalization tolerance for frames.
pub const FRAME_TOLERANCE: f64 = 1e-10;

fn check_square(g: &TensorValue) -> Result<usize> {
    let s = g.shape();
    if s.len() != 2 || s[0] != s[1] {
        return Err(Error::ShapeMismatch(format!("expected a square matrix, got shape {s:?}")));
    }
    Ok(s[0])
}

fn check_len(v: &[f64], m: usize) -> Result<()> {
    if v.len() != m {
        return Err(Error::ShapeMismatch(format!("vector has {} components, expected {m}", v.len())));
    }
    Ok(())
}

fn lower(g: &[f64], v: &[f64]) -> Vec<f64> {
    let m = v.len();
    (0..m).map(|a| (0..m).map(|b| g[a * m + b] * v[b]).sum()).collect()
}

fn dot(g: &[f64], u: &[f64], w: &[f64]) -> f64 {
    lower(g, u).iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Unit timelike observer `v` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverFrame {
    v: Vec<f64>,
    v_low: Vec<f64>,
}

impl ObserverFrame {
    pub fn new(g: &TensorValue, v: Vec<f64>) -> Result<ObserverFrame> {
        let m = check_square(g)?;
        check_len(&v, m)?;
        let norm = dot(g.data(), &v, &v);
        // rounding in g(v, v) scales with |g| |v|^2
        if (norm - 1.0).abs() >= norm_tolerance(g.data(), &v) {
            return Err(Error::FrameNotUnit(norm));
        }
        let v_low = lower(g.data(), &v);
        Ok(ObserverFrame { v, v_low })
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn v_low(&self) -> &[f64] {
        &self.v_low
    }
}

/// Null pair with `g(l,l) = g(n,n) = 0`, `g(l,n) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullFrame {
    l: Vec<f64>,
    n: Vec<f64>,
}

impl NullFrame {
    pub fn new(g: &TensorValue, l: Vec<f64>, n: Vec<f64>) -> Result<NullFrame> {
        let m = check_square(g)?;
        check_len(&l, m)?;
        check_len(&n, m)?;
        let gd = g.data();
        let ll = dot(gd, &l, &l);
        let nn = dot(gd, &n, &n);
        let ln = dot(gd, &l, &n);
        let (tl, tn) = (norm_tolerance(gd, &l), norm_tolerance(gd, &n));
        if ll.abs() >= tl {
            return Err(Error::FrameNotNull(format!("g(l,l) = {ll:e}")));
        }
        if nn.abs() >= tn {
            return Err(Error::FrameNotNull(format!("g(n,n) = {nn:e}")));
        }
        if (ln - 1.0).abs() >= tl.max(tn) {
            return Err(Error::FrameNotNull(format!("g(l,n) = {ln}")));
        }
        Ok(NullFrame { l, n })
    }

    /// `l, n = (v ± s)/√2` with `s` the normalized `g`-orthogonal part of the
    /// lowest-index coordinate direction that is not parallel to `v`.
    pub fn from_observer(g: &TensorValue, frame: &ObserverFrame) -> Result<NullFrame> {
        let m = check_square(g)?;
        for k in 0..m {
            let mut w = vec![0.0; m];
            w[k] = 1.0;
            if let Some(f) = Self::along(g, frame, &w)? {
                return Ok(f);
            }
        }
        Err(Error::FrameNotNull("no spatial direction available".into()))
    }

    /// Null pair built from the spatial part of `w`; `None` if `w` is parallel to `v`.
    pub fn along(g: &TensorValue, frame: &ObserverFrame, w: &[f64]) -> Result<Option<NullFrame>> {
        let m = check_square(g)?;
        check_len(w, m)?;
        let proj: f64 = w.iter().zip(frame.v_low()).map(|(a, b)| a * b).sum();
        let s: Vec<f64> = w.iter().zip(frame.v()).map(|(wi, vi)| wi - proj * vi).collect();
        let ss = dot(g.data(), &s, &s);
        let scale = w.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
        if -ss <= 1e-12 * scale * scale {
            return Ok(None);
        }
        let k = (-ss).sqrt();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let l = frame.v().iter().zip(&s).map(|(v, s)| r * (v + s / k)).collect();
        let n = frame.v().iter().zip(&s).map(|(v, s)| r * (v - s / k)).collect();
        NullFrame::new(g, l, n).map(Some)
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub fn n(&self) -> &[f64] {
        &self.n
    }
}

/// `g⁺_ab = 2 v_a v_b − g_ab`.
pub fn shadow_metric(g: &TensorValue, frame: &ObserverFrame) -> Result<TensorValue> {
    let m = check_square(g)?;
    let v = frame.v_low();
    Ok(TensorValue::from_fn(&[m, m], &[Down, Down], |i| {
        2.0 * v[i[0]] * v[i[1]] - g.get(i)
    }))
}

/// `g⁺^ab = 2 v^a v^b − g^ab`.
pub fn shadow_inverse(ginv: &TensorValue, frame: &ObserverFrame) -> Result<TensorValue> {
    let m = check_square(ginv)?;
    let v = frame.v();
    Ok(TensorValue::from_fn(&[m, m], &[Up, Up], |i| {
        2.0 * v[i[0]] * v[i[1]] - ginv.get(i)
    }))
}

/// Source metric, its inverse, and a pullback `f = φ*h` at one point, with `T = f − e g`.
#[derive(Debug, Clone, PartialEq)]
pub struct StressPoint {
    m: usize,
    g: Vec<f64>,
    ginv: Vec<f64>,
    f: Vec<f64>,
    e: f64,
    t: Vec<f64>,
}

impl StressPoint {
    pub fn new(g: &TensorValue, pullback: &TensorValue) -> Result<StressPoint> {
        let m = check_square(g)?;
        if pullback.shape() != [m, m] {
            return Err(Error::ShapeMismatch(format!(
                "pullback shape {:?} does not match metric dimension {m}",
                pullback.shape()
            )));
        }
        let ginv = linalg::inverse(m, g.data()).map_err(|det| Error::SingularMetric {
            point: Vec::new(),
            det,
        })?;
        let f = pullback.data().to_vec();
        let e = 0.5 * ginv.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        let t = f.iter().zip(g.data()).map(|(fv, gv)| fv - e * gv).collect();
        Ok(StressPoint {
            m,
            g: g.data().to_vec(),
            ginv,
            f,
            e,
            t,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn energy_density(&self) -> f64 {
        self.e
    }

    pub fn stress(&self) -> TensorValue {
        TensorValue::matrix(self.m, self.m, [Down, Down], self.t.clone())
    }

    pub fn trace(&self) -> f64 {
        self.ginv.iter().zip(&self.t).map(|(a, b)| a * b).sum()
    }

    fn norm_sq_low(&self, w: &[f64]) -> f64 {
        dot(&self.ginv, w, w)
    }

    fn contract(&self, u: &[f64]) -> Vec<f64> {
        lower(&self.t, u)
    }
}

/// Observer decomposition of `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySplit {
    /// `T(v, v)`
    pub density: f64,
    /// `½ g⁺^ab (φ*h)_ab`, computed independently of `T`
    pub e_plus: f64,
    /// `e = ½ g^ab (φ*h)_ab`
    pub e: f64,
    /// `I_a = T_ab v^b`
    pub momentum: TensorValue,
    /// `J_a = I_a − T(v,v) v_a`
    pub proper: TensorValue,
    /// `g^ab I_a I_b`
    pub momentum_norm_sq: f64,
    /// `J_a v^a`
    pub proper_dot_v: f64,
}

impl EnergySplit {
    /// `|I|² − e²`, nonnegative by the lower estimate.
    pub fn lower_margin(&self) -> f64 {
        self.momentum_norm_sq - self.e * self.e
    }

    /// `e⁺² − |I|²`, nonnegative by the upper estimate.
    pub fn upper_margin(&self) -> f64 {
        self.e_plus * self.e_plus - self.momentum_norm_sq
    }
}

pub fn energy_split(stress: &StressPoint, frame: &ObserverFrame) -> Result<EnergySplit> {
    check_len(frame.v(), stress.m)?;
    let m = stress.m;
    let v = frame.v();
    let vl = frame.v_low();
    let i = stress.contract(v);
    let density = i.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let j: Vec<f64> = i.iter().zip(vl).map(|(a, b)| a - density * b).collect();
    let mut e_plus = 0.0;
    for a in 0..m {
        for b in 0..m {
            e_plus += (2.0 * v[a] * v[b] - stress.ginv[a * m + b]) * stress.f[a * m + b];
        }
    }
    e_plus *= 0.5;
    Ok(EnergySplit {
        density,
        e_plus,
        e: stress.e,
        momentum_norm_sq: stress.norm_sq_low(&i),
        proper_dot_v: j.iter().zip(v).map(|(a, b)| a * b).sum(),
        momentum: TensorValue::vector(i, Down),
        proper: TensorValue::vector(j, Down),
    })
}

/// Null-frame decomposition of `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSplit {
    pub t_ll: f64,
    pub t_ln: f64,
    /// `h(φ_* l, φ_* l) = (φ*h)(l, l)`
    pub pushforward_sq: f64,
    /// `I_a = T_ab l^b`
    pub momentum: TensorValue,
    pub momentum_norm_sq: f64,
    /// `max_a |I_a − T(l,l) n_a|`
    pub equality_gap: f64,
}

impl NullSplit {
    /// `2 T(l,l) T(l,n) − |I|²`.
    pub fn upper_margin(&self) -> f64 {
        2.0 * self.t_ll * self.t_ln - self.momentum_norm_sq
    }
}

pub fn null_energy_split(stress: &StressPoint, frame: &NullFrame) -> Result<NullSplit> {
    check_len(frame.l(), stress.m)?;
    let (l, n) = (frame.l(), frame.n());
    let i = stress.contract(l);
    let t_ll = i.iter().zip(l).map(|(a, b)| a * b).sum::<f64>();
    let t_ln = i.iter().zip(n).map(|(a, b)| a * b).sum::<f64>();
    let n_low = lower(&stress.g, n);
    let gap = i
        .iter()
        .zip(&n_low)
        .fold(0.0f64, |acc, (ia, na)| acc.max((ia - t_ll * na).abs()));
    Ok(NullSplit {
        t_ll,
        t_ln,
        pushforward_sq: dot(&stress.f, l, l),
        momentum_norm_sq: stress.norm_sq_low(&i),
        equality_gap: gap,
        momentum: TensorValue::vector(i, Down),
    })
}

/// Dominant and strong conditions for one observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConditions {
    /// `T(v, v)`
    pub density: f64,
    /// `|I|²`
    pub momentum_norm_sq: f64,
    /// `(m − 2) T(v,v) − tr T`
    pub strong_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConditions {
    pub frames: Vec<FrameConditions>,
    /// Smallest of `T(v,v)` and `|I|²` over all frames.
    pub dominant_worst: f64,
    /// Smallest strong margin over all frames.
    pub strong_worst: f64,
    /// `m = 2`, where the strong inequality reads `0 >= tr T`.
    pub degenerate_dimension: bool,
}

impl EnergyConditions {
    pub fn dominant_holds(&self, slack: f64) -> bool {
        self.dominant_worst >= -slack
    }

    pub fn strong_holds(&self, slack: f64) -> bool {
        self.strong_worst >= -slack
    }
}

pub fn classical_energy_conditions(stress: &StressPoint, frames: &[ObserverFrame]) -> Result<EnergyConditions> {
    let m = stress.m;
    let tr = stress.trace();
    let mut out = Vec::with_capacity(frames.len());
    let mut dom = f64::INFINITY;
    let mut strong = f64::INFINITY;
    for f in frames {
        let s = energy_split(stress, f)?;
        let fc = FrameConditions {
            density: s.density,
            momentum_norm_sq: s.momentum_norm_sq,
            strong_margin: (m as f64 - 2.0) * s.density - tr,
        };
        dom = dom.min(fc.density).min(fc.momentum_norm_sq);
        strong = strong.min(fc.strong_margin);
        out.push(fc);
    }
    Ok(EnergyConditions {
        frames: out,
        dominant_worst: if frames.is_empty() { 0.0 } else { dom },
        strong_worst: if frames.is_empty() { 0.0 } else { strong },
        degenerate_dimension: m == 2,
    })
}

/// All permutations of `0..k` with their signs.
fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if left.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..left.len() {
            let x = left.remove(i);
            prefix.push(x);
            // moving element i to the front costs i transpositions
            let s = if i % 2 == 0 { sign } else { -sign };
            rec(prefix, left, s, out);
            prefix.pop();
            left.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), 1.0, &mut out);
    out
}

/// Antisymmetrizes `t` over `slots` with the `1/k!` factor.
pub fn antisymmetrize(t: &TensorValue, slots: &[usize]) -> TensorValue {
    let perms = permutations(slots.len());
    let norm = 1.0 / perms.len() as f64;
    let shape = t.shape().to_vec();
    let mut src = vec![0; shape.len()];
    TensorValue::from_fn(&shape, t.variance(), |idx| {
        let mut s = 0.0;
        for (p, sign) in &perms {
            src.copy_from_slice(idx);
            for (k, &slot) in slots.iter().enumerate() {
                src[slot] = idx[slots[p[k]]];
            }
            s += sign * t.get(&src);
        }
        s * norm
    })
}

/// Max-norms of the radiation condition tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationReport {
    /// `R_abcd l^d`
    pub lich1: f64,
    /// `R_ab[cd l_e]`
    pub lich2: f64,
    /// `R_abcd l^b l^d`
    pub bel1: f64,
    /// `l^b R_ab[cd l_e]`
    pub bel2: f64,
    /// `l_[f R_ab][cd l_e]`
    pub bel3: f64,
    /// `R_ab l^b`
    pub ricci_rad1: f64,
    /// `R_a[b l_c]`
    pub ricci_rad2: f64,
    /// `G_ab l^b`
    pub einstein_rad1: f64,
    /// `G_a[b l_c]`
    pub einstein_rad2: f64,
}

impl RadiationReport {
    pub fn lichnerowicz(&self) -> f64 {
        self.lich1.max(self.lich2)
    }

    pub fn bel(&self) -> f64 {
        self.bel1.max(self.bel2).max(self.bel3)
    }

    /// Named residuals in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("lich1", self.lich1),
            ("lich2", self.lich2),
            ("bel1", self.bel1),
            ("bel2", self.bel2),
            ("bel3", self.bel3),
            ("ricci_rad1", self.ricci_rad1),
            ("ricci_rad2", self.ricci_rad2),
            ("einstein_rad1", self.einstein_rad1),
            ("einstein_rad2", self.einstein_rad2),
        ]
    }
}

/// `FRAME_TOLERANCE` scaled by `|g| |u|^2`, the rounding size of `g(u, u)`.
fn norm_tolerance(g: &[f64], l: &[f64]) -> f64 {
    let gs = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let ls = l.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    FRAME_TOLERANCE * (gs * ls * ls).max(1.0)
}

/// Radiation conditions for `l` (components `l^a`) at a point whose geometry is known.
pub fn radiation_at(geo: &LocalGeometry, l: &[f64]) -> Result<RadiationReport> {
    let m = geo.dim();
    check_len(l, m)?;
    let g = geo.g();
    let ll = dot(g, l, l);
    if ll.abs() > norm_tolerance(g, l) {
        return Err(Error::FrameNotNull(format!("g(l,l) = {ll:e}")));
    }
    let lo = lower(g, l);
    let r = geo.riemann();
    let rd = r.data();
    let at4 = |a: usize, b: usize, c: usize, d: usize| rd[((a * m + b) * m + c) * m + d];

    let lich1 = TensorValue::from_fn(&[m; 3], &[Down; 3], |i| {
        (0..m).map(|d| at4(i[0], i[1], i[2], d) * l[d]).sum()
    });
    let x = TensorValue::from_fn(&[m; 5], &[Down; 5], |i| at4(i[0], i[1], i[2], i[3]) * lo[i[4]]);
    let lich2 = antisymmetrize(&x, &[2, 3, 4]);
    let bel1 = TensorValue::from_fn(&[m; 2], &[Down; 2], |i| {
        let mut s = 0.0;
        for b in 0..m {
            for d in 0..m {
                s += at4(i[0], b, i[1], d) * l[b] * l[d];
            }
        }
        s
    });
    let bel2 = TensorValue::from_fn(&[m; 4], &[Down; 4], |i| {
        (0..m).map(|b| l[b] * lich2.get(&[i[0], b, i[1], i[2], i[3]])).sum()
    });
    let y = TensorValue::from_fn(&[m; 6], &[Down; 6], |i| {
        lo[i[0]] * at4(i[1], i[2], i[3], i[4]) * lo[i[5]]
    });
    let bel3 = antisymmetrize(&antisymmetrize(&y, &[0, 1, 2]), &[3, 4, 5]);

    let pair = |s: &TensorValue| -> (f64, f64) {
        let sd = s.data();
        let one: f64 = (0..m)
            .map(|a| (0..m).map(|b| sd[a * m + b] * l[b]).sum::<f64>().abs())
            .fold(0.0, f64::max);
        let mut two: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    two = two.max((0.5 * (sd[a * m + b] * lo[c] - sd[a * m + c] * lo[b])).abs());
                }
            }
        }
        (one, two)
    };
    let (ricci_rad1, ricci_rad2) = pair(&geo.ricci());
    let (einstein_rad1, einstein_rad2) = pair(&geo.einstein());
    Ok(RadiationReport {
        lich1: lich1.max_abs(),
        lich2: lich2.max_abs(),
        bel1: bel1.max_abs(),
        bel2: bel2.max_abs(),
        bel3: bel3.max_abs(),
        ricci_rad1,
        ricci_rad2,
        einstein_rad1,
        einstein_rad2,
    })
}

pub fn radiation_conditions(g: &MetricField, l: &VectorField, p: &[f64]) -> Result<RadiationReport> {
    check_same_chart(g.chart(), l.chart())?;
    let geo = LocalGeometry::at(g, p, 2)?;
    radiation_at(&geo, &l.at(p)?)
}

/// Max-norms of the defining tensors of special vector fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificates {
    /// `∇_(a l_b)`
    pub killing: f64,
    /// `l_[c ∇_a l_b]`
    pub hypersurface_orthogonal: f64,
    /// `∇_a l_b`
    pub covariantly_constant: f64,
    /// `|g(l, l)|`
    pub lightlike: f64,
}

impl Certificates {
    pub fn entries(&self) -> [(&'static str, f64); 4] {
        [
            ("killing", self.killing),
            ("hypersurface_orthogonal", self.hypersurface_orthogonal),
            ("covariantly_constant", self.covariantly_constant),
            ("lightlike", self.lightlike),
        ]
    }
}

pub fn vector_field_certificates(g: &MetricField, l: &VectorField, p: &[f64]) -> Result<Certificates> {
    check_same_chart(g.chart(), l.chart())?;
    let geo = LocalGeometry::at(g, p, 1)?;
    let (lv, dl) = l.jet(p)?;
    let m = geo.dim();
    let gd = geo.g();
    let gamma = geo.gamma();
    // ∇_a l^c = ∂_a l^c + Γ^c_ae l^e, then lower c.
    let mut nab_up = vec![0.0; m * m];
    for a in 0..m {
        for c in 0..m {
            let mut s = dl[c * m + a];
            for e in 0..m {
                s += gamma[(c * m + a) * m + e] * lv[e];
            }
            nab_up[a * m + c] = s;
        }
    }
    let nab = TensorValue::from_fn(&[m, m], &[Down, Down], |i| {
        (0..m).map(|c| gd[i[1] * m + c] * nab_up[i[0] * m + c]).sum()
    });
    let lo = lower(gd, &lv);
    let killing = antisym_free_sym(&nab);
    let z = TensorValue::from_fn(&[m; 3], &[Down; 3], |i| lo[i[0]] * nab.get(&[i[1], i[2]]));
    let hyp = antisymmetrize(&z, &[0, 1, 2]);
    Ok(Certificates {
        killing,
        hypersurface_orthogonal: hyp.max_abs(),
        covariantly_constant: nab.max_abs(),
        lightlike: dot(gd, &lv, &lv).abs(),
    })
}

fn antisym_free_sym(t: &TensorValue) -> f64 {
    let m = t.shape()[0];
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            worst = worst.max((0.5 * (t.get(&[a, b]) + t.get(&[b, a]))).abs());
        }
    }
    worst
}

/// Random inputs for one fuzz trial.
#[derive(Debug, Clone)]
pub struct FuzzSample {
    pub g: TensorValue,
    pub frame: ObserverFrame,
    /// Random unit spacelike direction orthogonal to the observer.
    pub null: NullFrame,
    pub stress: StressPoint,
    pub target_dim: usize,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

/// Largest ratio of eigenvalue magnitudes accepted for fuzz metrics. Margins are compared
/// with an absolute slack, so the metric must keep `|v|` and `e` of order one.
const FUZZ_CONDITION: f64 = 1e3;

/// Lorentzian metric `Aᵀ η A` with `A = 2I + noise`, redrawn until well conditioned.
fn random_lorentzian(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let g = lorentzian_draw(rng, m);
        let mags: Vec<f64> = linalg::symmetric_eigenvalues(m, &g).iter().map(|x| x.abs()).collect();
        let (lo, hi) = mags.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        if hi <= FUZZ_CONDITION * lo {
            return g;
        }
    }
}

fn lorentzian_draw(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut a = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            a[r * m + c] = uniform(rng) + if r == c { 2.0 } else { 0.0 };
        }
    }
    let mut g = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                let eta = if k == 0 { 1.0 } else { -1.0 };
                s += a[k * m + r] * eta * a[k * m + c];
            }
            g[r * m + c] = s;
        }
    }
    g
}

/// Rest observer of a Lorentzian `g` (its timelike eigenvector) moving with velocity `beta`,
/// given in the eigenbasis of the spacelike directions, ascending eigenvalue order.
/// `|beta| < 1` is required.
pub fn observer_from_velocity(g: &TensorValue, beta: &[f64]) -> Result<ObserverFrame> {
    let m = check_square(g)?;
    check_len(beta, m - 1)?;
    if beta.iter().map(|b| b * b).sum::<f64>() >= 1.0 {
        return Err(Error::Invalid("observer velocity must have norm below 1".into()));
    }
    let gd = g.data();
    let (vals, vecs) = linalg::symmetric_eigen(m, gd);
    if vals[m - 1] <= 0.0 || vals[..m - 1].iter().any(|&x| x >= 0.0) {
        return Err(Error::Invalid("observer frames need a Lorentzian metric".into()));
    }
    // ascending eigenvalues: the single positive one is last
    let col = |j: usize| -> Vec<f64> { (0..m).map(|r| vecs[r * m + j]).collect() };
    let mut v: Vec<f64> = col(m - 1).iter().map(|x| x / vals[m - 1].sqrt()).collect();
    for (j, b) in beta.iter().enumerate() {
        let q = col(j);
        let s = vals[j].abs().sqrt();
        for r in 0..m {
            v[r] += b * q[r] / s;
        }
    }
    let norm = dot(gd, &v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    ObserverFrame::new(g, v)
}

/// Draws one trial: dimensions `m ∈ [2, 5]`, `n ∈ [1, 4]`.
pub fn fuzz_sample(rng: &mut ChaCha8Rng) -> Result<FuzzSample> {
    let m = rng.gen_range(2..=5);
    let n = rng.gen_range(1..=4);
    let gd = random_lorentzian(rng, m);
    let g = TensorValue::matrix(m, m, [Down, Down], gd.clone());
    let mut beta: Vec<f64> = (0..m - 1).map(|_| uniform(rng)).collect();
    let bn = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    let target = 0.9 * rng.gen_range(0.0..1.0f64);
    if bn > 0.0 {
        beta.iter_mut().for_each(|b| *b *= target / bn);
    }
    let frame = observer_from_velocity(&g, &beta)?;

    let mut null = None;
    while null.is_none() {
        let w: Vec<f64> = (0..m).map(|_| uniform(rng)).collect();
        null = NullFrame::along(&g, &frame, &w)?;
    }

    let mut b = vec![0.0; n * n];
    b.iter_mut().for_each(|x| *x = uniform(rng));
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>()
                + if i == j { 0.1 } else { 0.0 };
        }
    }
    let dphi: Vec<f64> = (0..n * m).map(|_| uniform(rng)).collect();
    let f = TensorValue::from_fn(&[m, m], &[Down, Down], |ab| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += dphi[i * m + ab[0]] * dphi[j * m + ab[1]] * h[i * n + j];
            }
        }
        s
    });
    Ok(FuzzSample {
        stress: StressPoint::new(&g, &f)?,
        g,
        frame,
        null: null.unwrap(),
        target_dim: n,
    })
}

/// Worst margins seen over a batch of fuzz trials; every margin should be `>= -slack`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzSummary {
    pub trials: usize,
    /// min `|I|² − e²`
    pub lower: f64,
    /// min `e⁺² − |I|²`
    pub upper: f64,
    /// max `|T(v,v) − e⁺|`
    pub density_gap: f64,
    /// max `|J_a v^a|`
    pub proper_orthogonality: f64,
    /// min of `T(v,v)` and `|I|²`
    pub dominant: f64,
    /// min `(m−2) T(v,v) − tr T`
    pub strong: f64,
    /// min `T(l,l)`
    pub null_t_ll: f64,
    /// min `T(l,n)`
    pub null_t_ln: f64,
    /// min `|I_l|²`
    pub null_lower: f64,
    /// min `2 T(l,l) T(l,n) − |I_l|²`
    pub null_upper: f64,
    /// max `| |I|² − e² |` over trials with a one-dimensional target
    pub n1_left_gap: f64,
    /// trials with a one-dimensional target
    pub n1_trials: usize,
}

pub fn fuzz_energy_conditions(seed: u64, trials: usize) -> Result<FuzzSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = FuzzSummary {
        trials,
        lower: f64::INFINITY,
        upper: f64::INFINITY,
        density_gap: 0.0,
        proper_orthogonality: 0.0,
        dominant: f64::INFINITY,
        strong: f64::INFINITY,
        null_t_ll: f64::INFINITY,
        null_t_ln: f64::INFINITY,
        null_lower: f64::INFINITY,
        null_upper: f64::INFINITY,
        n1_left_gap: 0.0,
        n1_trials: 0,
    };
    for _ in 0..trials {
        let t = fuzz_sample(&mut rng)?;
        let es = energy_split(&t.stress, &t.frame)?;
        s.lower = s.lower.min(es.lower_margin());
        s.upper = s.upper.min(es.upper_margin());
        s.density_gap = s.density_gap.max((es.density - es.e_plus).abs());
        s.proper_orthogonality = s.proper_orthogonality.max(es.proper_dot_v.abs());
        let ec = classical_energy_conditions(&t.stress, std::slice::from_ref(&t.frame))?;
        s.dominant = s.dominant.min(ec.dominant_worst);
        s.strong = s.strong.min(ec.strong_worst);
        let ns = null_energy_split(&t.stress, &t.null)?;
        s.null_t_ll = s.null_t_ll.min(ns.t_ll);
        s.null_t_ln = s.null_t_ln.min(ns.t_ln);
        s.null_lower = s.null_lower.min(ns.momentum_norm_sq);
        s.null_upper = s.null_upper.min(ns.upper_margin());
        if t.target_dim == 1 {
            s.n1_trials += 1;
            s.n1_left_gap = s.n1_left_gap.max(es.lower_margin().abs());
        }
    }
    Ok(s)
}
