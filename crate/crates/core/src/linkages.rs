//! Interaction matrices for electric-dipole transitions between degenerate
//! angular-momentum levels.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::morris_shore::InteractionMatrix;

/// A nonnegative or negative half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub const fn integer(n: i32) -> Self {
        Self(2 * n)
    }

    /// Fails unless `x` is a multiple of one half.
    pub fn from_f64(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        if !t.is_finite() || (t - t.round()).abs() > 1e-9 || t.abs() > 1e6 {
            return Err(Error::Validation(format!("{x} is not a half-integer")));
        }
        Ok(Self(t.round() as i32))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `-j, -j+1, ..., j`
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        (0..=self.0.max(-1)).map(move |k| HalfInt(2 * k - self.0))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | j m>` in the Condon-Shortley
/// convention, from Racah's closed-form sum.
///
/// Returns 0 when `m != m1 + m2`, the triangle rule fails, a projection
/// exceeds its angular momentum, or `j ± m` is not an integer.
pub fn clebsch_gordan(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> f64 {
    let (tj1, tm1, tj2, tm2, tj, tm) = (j1.0, m1.0, j2.0, m2.0, j.0, m.0);
    if tm != tm1 + tm2 || tj1 < 0 || tj2 < 0 || tj < 0 {
        return 0.0;
    }
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj, tm)] {
        if tm.abs() > tj || (tj + tm) % 2 != 0 {
            return 0.0;
        }
    }
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    let half = |x: i32| x / 2;
    let a = half(tj1 + tj2 - tj);
    let b = half(tj1 - tm1);
    let c = half(tj2 + tm2);
    let d = half(tj - tj2 + tm1);
    let e = half(tj - tj1 - tm2);

    let prefactor =
        (f64::from(tj + 1) * factorial(half(tj + tj1 - tj2)) * factorial(half(tj - tj1 + tj2)) * factorial(a)
            / factorial(half(tj1 + tj2 + tj) + 1))
        .sqrt()
            * (factorial(half(tj + tm))
                * factorial(half(tj - tm))
                * factorial(b)
                * factorial(half(tj1 + tm1))
                * factorial(half(tj2 - tm2))
                * factorial(c))
            .sqrt();

    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);
    let sum: f64 = (k_min..=k_max)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign / (factorial(k)
                * factorial(a - k)
                * factorial(b - k)
                * factorial(c - k)
                * factorial(d + k)
                * factorial(e + k))
        })
        .sum();
    prefactor * sum
}

/// Field amplitudes for the three polarizations, in units of `1/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationAmplitudes {
    /// σ⁺, driving `Δm = +1`.
    pub plus: C64,
    /// π, driving `Δm = 0`.
    pub zero: C64,
    /// σ⁻, driving `Δm = -1`.
    pub minus: C64,
}

impl PolarizationAmplitudes {
    pub fn new(plus: C64, zero: C64, minus: C64) -> Result<Self> {
        if [plus, zero, minus].iter().any(|z| !z.is_finite()) {
            return Err(Error::Validation("polarization amplitudes must be finite".into()));
        }
        Ok(Self { plus, zero, minus })
    }

    /// Equal real amplitude `v` in every polarization.
    pub fn uniform(v: f64) -> Self {
        let z = C64::new(v, 0.0);
        Self {
            plus: z,
            zero: z,
            minus: z,
        }
    }

    /// Amplitude for `Δm = q`.
    pub fn component(&self, q: i32) -> C64 {
        match q {
            1 => self.plus,
            0 => self.zero,
            -1 => self.minus,
            _ => C64::new(0.0, 0.0),
        }
    }

    fn is_zero(&self) -> bool {
        [self.plus, self.zero, self.minus]
            .iter()
            .all(|z| *z == C64::new(0.0, 0.0))
    }
}

/// What to build.
#[derive(Debug, Clone)]
pub enum LinkageSpec {
    /// Transition `J_lower ↔ J_upper`; sublevels ordered by `m` ascending.
    TwoLevel {
        j_lower: HalfInt,
        j_upper: HalfInt,
        pol: PolarizationAmplitudes,
    },
    /// `J = 0 ↔ 1 ↔ 0` ladder. The three `J = 1` sublevels form the lower
    /// set; the two `J = 0` ends form the upper set, one per field.
    Ladder010 {
        first: PolarizationAmplitudes,
        second: PolarizationAmplitudes,
    },
    Explicit(InteractionMatrix),
}

/// A set of sublevels coupled among themselves and to nothing else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkageBlock {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl LinkageBlock {
    pub fn size(&self) -> usize {
        self.lower.len() + self.upper.len()
    }
}

/// Output of [`build_linkage`].
#[derive(Debug, Clone)]
pub struct Linkage {
    pub matrix: InteractionMatrix,
    pub lower_labels: Vec<String>,
    pub upper_labels: Vec<String>,
    /// Connected components of the coupling graph, largest first.
    pub blocks: Vec<LinkageBlock>,
    /// Sublevels with no coupling at all.
    pub uncoupled_lower: Vec<usize>,
    pub uncoupled_upper: Vec<usize>,
}

impl Linkage {
    /// Restriction of the interaction matrix to one block.
    pub fn block_matrix(&self, block: &LinkageBlock) -> Result<InteractionMatrix> {
        self.matrix.select(&block.lower, &block.upper)
    }
}

/// Builds the interaction matrix and its block structure.
pub fn build_linkage(spec: &LinkageSpec) -> Result<Linkage> {
    let (matrix, lower_labels, upper_labels) = match spec {
        LinkageSpec::TwoLevel { j_lower, j_upper, pol } => two_level(*j_lower, *j_upper, pol)?,
        LinkageSpec::Ladder010 { first, second } => {
            if first.is_zero() && second.is_zero() {
                return Err(Error::Validation("ladder has no nonzero field".into()));
            }
            let v = ComplexMatrix::from_rows(&[
                vec![first.plus, second.plus],
                vec![first.zero, second.zero],
                vec![first.minus, second.minus],
            ])?;
            (
                InteractionMatrix::new(v)?,
                vec!["J=1 (+)".into(), "J=1 (0)".into(), "J=1 (-)".into()],
                vec!["J=0 first".into(), "J=0 second".into()],
            )
        }
        LinkageSpec::Explicit(v) => {
            let n = v.lower_dim();
            let m = v.upper_dim();
            (
                v.clone(),
                (0..n).map(|i| format!("lower {i}")).collect(),
                (0..m).map(|i| format!("upper {i}")).collect(),
            )
        }
    };
    if matrix.matrix().max_abs() == 0.0 {
        return Err(Error::Validation(
            "linkage is uncoupled: every amplitude is zero".into(),
        ));
    }
    let (blocks, uncoupled_lower, uncoupled_upper) = components(matrix.matrix());
    Ok(Linkage {
        matrix,
        lower_labels,
        upper_labels,
        blocks,
        uncoupled_lower,
        uncoupled_upper,
    })
}

fn two_level(
    j_lower: HalfInt,
    j_upper: HalfInt,
    pol: &PolarizationAmplitudes,
) -> Result<(InteractionMatrix, Vec<String>, Vec<String>)> {
    if j_lower.0 < 0 || j_upper.0 < 0 {
        return Err(Error::Validation("angular momenta must be nonnegative".into()));
    }
    let dj = j_upper.0 - j_lower.0;
    if dj.abs() > 2 || dj % 2 != 0 {
        return Err(Error::Validation(format!(
            "J = {j_lower} ↔ {j_upper} is not an electric-dipole transition"
        )));
    }
    if j_lower.0 == 0 && j_upper.0 == 0 {
        return Err(Error::Validation("J = 0 ↔ 0 has no dipole coupling".into()));
    }
    if pol.is_zero() {
        return Err(Error::Validation(
            "linkage is uncoupled: every amplitude is zero".into(),
        ));
    }
    let lower: Vec<HalfInt> = j_lower.projections().collect();
    let upper: Vec<HalfInt> = j_upper.projections().collect();
    let one = HalfInt::integer(1);
    let v = ComplexMatrix::from_fn(lower.len(), upper.len(), |i, k| {
        let q = (upper[k].0 - lower[i].0) / 2;
        if (upper[k].0 - lower[i].0).abs() > 2 {
            return C64::new(0.0, 0.0);
        }
        pol.component(q) * clebsch_gordan(j_lower, lower[i], one, HalfInt(2 * q), j_upper, upper[k])
    });
    Ok((
        InteractionMatrix::new(v)?,
        lower.iter().map(|m| format!("m={m}")).collect(),
        upper.iter().map(|m| format!("m'={m}")).collect(),
    ))
}

fn components(v: &ComplexMatrix) -> (Vec<LinkageBlock>, Vec<usize>, Vec<usize>) {
    let (n, m) = (v.rows(), v.cols());
    let mut parent: Vec<usize> = (0..n + m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let cut = 1e-14 * v.max_abs();
    for i in 0..n {
        for k in 0..m {
            if v[(i, k)].norm() > cut {
                let (a, b) = (find(&mut parent, i), find(&mut parent, n + k));
                parent[a] = b;
            }
        }
    }
    let coupled_lower: Vec<bool> = (0..n).map(|i| (0..m).any(|k| v[(i, k)].norm() > cut)).collect();
    let coupled_upper: Vec<bool> = (0..m).map(|k| (0..n).any(|i| v[(i, k)].norm() > cut)).collect();

    let mut roots: Vec<usize> = Vec::new();
    let mut blocks: Vec<LinkageBlock> = Vec::new();
    for node in 0..n + m {
        let coupled = if node < n {
            coupled_lower[node]
        } else {
            coupled_upper[node - n]
        };
        if !coupled {
            continue;
        }
        let r = find(&mut parent, node);
        let idx = match roots.iter().position(|&x| x == r) {
            Some(i) => i,
            None => {
                roots.push(r);
                blocks.push(LinkageBlock {
                    lower: vec![],
                    upper: vec![],
                });
                roots.len() - 1
            }
        };
        if node < n {
            blocks[idx].lower.push(node);
        } else {
            blocks[idx].upper.push(node - n);
        }
    }
    blocks.sort_by_key(|b| std::cmp::Reverse(b.size()));
    let uncoupled_lower = (0..n).filter(|&i| !coupled_lower[i]).collect();
    let uncoupled_upper = (0..m).filter(|&k| !coupled_upper[k]).collect();
    (blocks, uncoupled_lower, uncoupled_upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn singlet_and_stretched_states() {
        let s = clebsch_gordan(h(1), h(1), h(1), h(-1), h(0), h(0));
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let t = clebsch_gordan(h(1), h(-1), h(1), h(1), h(0), h(0));
        assert!((t + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((clebsch_gordan(h(4), h(4), h(2), h(2), h(6), h(6)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn selection_rules_give_zero() {
        assert_eq!(clebsch_gordan(h(1), h(1), h(1), h(1), h(2), h(0)), 0.0);
        assert_eq!(clebsch_gordan(h(1), h(1), h(1), h(-1), h(4), h(0)), 0.0);
        assert_eq!(clebsch_gordan(h(1), h(3), h(1), h(-3), h(0), h(0)), 0.0);
    }

    #[test]
    fn half_int_parsing_and_display() {
        assert_eq!(HalfInt::from_f64(1.5).unwrap(), h(3));
        assert!(HalfInt::from_f64(0.3).is_err());
        assert_eq!(h(3).to_string(), "3/2");
        assert_eq!(h(-4).to_string(), "-2");
        let ms: Vec<i32> = h(3).projections().map(HalfInt::twice).collect();
        assert_eq!(ms, vec![-3, -1, 1, 3]);
    }

    #[test]
    fn forbidden_transitions_are_rejected() {
        let pol = PolarizationAmplitudes::uniform(1.0);
        for (a, b) in [(0, 0), (1, 5), (2, 3)] {
            let spec = LinkageSpec::TwoLevel {
                j_lower: h(a),
                j_upper: h(b),
                pol,
            };
            assert!(build_linkage(&spec).is_err(), "{a} {b}");
        }
        let zero = LinkageSpec::TwoLevel {
            j_lower: h(2),
            j_upper: h(2),
            pol: PolarizationAmplitudes::uniform(0.0),
        };
        assert!(matches!(build_linkage(&zero), Err(Error::Validation(_))));
    }

    #[test]
    fn ladder_layout() {
        let c = |x: f64| C64::new(x, 0.0);
        let first = PolarizationAmplitudes::new(c(1.0), c(2.0), c(3.0)).unwrap();
        let second = PolarizationAmplitudes::new(c(4.0), c(5.0), c(6.0)).unwrap();
        let l = build_linkage(&LinkageSpec::Ladder010 { first, second }).unwrap();
        let v = l.matrix.matrix();
        assert_eq!((v.rows(), v.cols()), (3, 2));
        assert_eq!(v[(0, 1)], c(4.0));
        assert_eq!(v[(2, 0)], c(3.0));
        assert_eq!(l.blocks.len(), 1);
    }

    #[test]
    fn pi_only_j1_to_j1_leaves_a_dark_corner() {
        // <1 0; 1 0 | 1 0> = 0, so the m = 0 pair drops out.
        let pol = PolarizationAmplitudes::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let l = build_linkage(&LinkageSpec::TwoLevel {
            j_lower: h(2),
            j_upper: h(2),
            pol,
        })
        .unwrap();
        assert_eq!(l.uncoupled_lower, vec![1]);
        assert_eq!(l.uncoupled_upper, vec![1]);
        assert_eq!(l.blocks.len(), 2);
    }
}
