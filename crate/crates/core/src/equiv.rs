//! Numerical comparison of signature manifolds.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::catalog::Chart;
use crate::jets::BundleKind;
use crate::numeric::{sample_signature, Evaluator, Grid, NumericError, SignatureSample, SignatureSet};

#[derive(Clone, Debug, PartialEq)]
pub struct EquivConfig {
    /// Relative residual accepted as a match.
    pub tau_match: f64,
    /// Fraction of samples that must find a counterpart.
    pub coverage: f64,
    /// Neighbours used for the local linear model.
    pub neighbors: usize,
    /// Minimum number of regular samples per side.
    pub n_min: usize,
    pub symmetrize: bool,
}

impl Default for EquivConfig {
    fn default() -> Self {
        EquivConfig {
            tau_match: 1e-6,
            coverage: 0.3,
            neighbors: 12,
            n_min: 200,
            symmetrize: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Equivalent => 0,
            Verdict::NotEquivalent => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// A matched pair whose remaining coordinates disagree.
    Residual {
        a: [f64; 3],
        b: [f64; 3],
        residual: f64,
        coordinate: String,
    },
    /// A coordinate whose ranges over the two samples are separated.
    DisjointRange {
        coordinate: String,
        a: [f64; 2],
        b: [f64; 2],
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceVerdict {
    pub verdict: Verdict,
    pub matched: usize,
    pub compared: usize,
    pub max_residual: f64,
    pub chart: Option<[i64; 2]>,
    pub chart_coordinates: Vec<String>,
    pub rank: Option<usize>,
    pub certificate: Option<Certificate>,
    pub diagnostics: Vec<String>,
}

impl EquivalenceVerdict {
    fn inconclusive(diagnostics: Vec<String>) -> Self {
        EquivalenceVerdict {
            verdict: Verdict::Inconclusive,
            matched: 0,
            compared: 0,
            max_residual: f64::NAN,
            chart: None,
            chart_coordinates: Vec::new(),
            rank: None,
            certificate: None,
            diagnostics,
        }
    }
}

/// Relative difference used for every coordinate comparison.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn fd_step(v: f64) -> f64 {
    1e-5 * (1.0 + v.abs())
}

/// `∂σ_i/∂(x, y, p)` at a point by central differences, restricted to
/// `coords` (all coordinates when empty). Points off the chart or singular
/// give `None`.
pub fn signature_jacobian(ev: &Evaluator, base: [f64; 3], chart: Chart, coords: &[usize]) -> Option<DMatrix<f64>> {
    let mut cols = Vec::with_capacity(3);
    for a in 0..3 {
        let h = fd_step(base[a]);
        let mut plus = base;
        let mut minus = base;
        plus[a] += h;
        minus[a] -= h;
        let sp = ev.sample(plus).ok().filter(|s| s.chart == chart)?;
        let sm = ev.sample(minus).ok().filter(|s| s.chart == chart)?;
        let pick = |s: &SignatureSample| -> Vec<f64> {
            if coords.is_empty() {
                s.coords.clone()
            } else {
                coords.iter().map(|&i| s.coords[i]).collect()
            }
        };
        let (vp, vm) = (pick(&sp), pick(&sm));
        cols.push(vp.iter().zip(&vm).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>());
    }
    let rows = cols[0].len();
    Some(DMatrix::from_fn(rows, 3, |i, j| cols[j][i]))
}

/// Singular values relative to the largest, with each row scaled by the
/// magnitude of its coordinate.
fn relative_singular_values(j: &DMatrix<f64>, values: &[f64]) -> Vec<f64> {
    let scaled = DMatrix::from_fn(j.nrows(), j.ncols(), |i, k| j[(i, k)] / values[i].abs().max(1.0));
    let sv = scaled.singular_values();
    let top = sv.max();
    if top <= 0.0 || !top.is_finite() {
        return vec![0.0; sv.len()];
    }
    let mut out: Vec<f64> = sv.iter().map(|s| s / top).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Numeric rank of the signature map at a point.
pub fn numeric_rank(ev: &Evaluator, s: &SignatureSample, tol: f64) -> Option<usize> {
    let j = signature_jacobian(ev, s.base, s.chart, &[])?;
    if j.iter().all(|v| v.abs() <= tol) {
        return Some(0);
    }
    Some(relative_singular_values(&j, &s.coords).iter().filter(|&&v| v > tol).count())
}

const RANK_TOL: f64 = 1e-6;

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Candidate chart coordinates of a bundle: `j1, j2, j3` on π and
/// `m1, …, m5` on π̃.
pub fn candidate_coordinates(kind: BundleKind) -> usize {
    match kind {
        BundleKind::Pi => 3,
        BundleKind::PiTilde => 5,
    }
}

/// Smallest relative singular value of the sub-Jacobian on `subset`,
/// minimised over probes.
fn conditioning(probes: &[(DMatrix<f64>, Vec<f64>)], subset: &[usize]) -> f64 {
    probes
        .iter()
        .map(|(j, v)| {
            let sub = DMatrix::from_fn(subset.len(), 3, |i, k| j[(subset[i], k)] / v[subset[i]].abs().max(1.0));
            sub.singular_values().min()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Best-conditioned `r`-subset of the candidate coordinates.
pub fn choose_chart_coordinates(
    kind: BundleKind,
    probes: &[(DMatrix<f64>, Vec<f64>)],
    r: usize,
) -> (Vec<usize>, f64) {
    if r == 0 {
        return (Vec::new(), f64::INFINITY);
    }
    subsets(candidate_coordinates(kind), r)
        .into_iter()
        .map(|s| {
            let c = conditioning(probes, &s);
            (s, c)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((Vec::new(), 0.0))
}

/// Evenly spread subset of samples used to probe ranks.
fn probe_samples<'a>(samples: &[&'a SignatureSample], n: usize) -> Vec<&'a SignatureSample> {
    if samples.is_empty() {
        return Vec::new();
    }
    let step = (samples.len() / n).max(1);
    samples.iter().step_by(step).take(n).copied().collect()
}

/// Report of the regular-germ conditions at a point of an ODE.
#[derive(Clone, Debug, Serialize)]
pub struct GermReport {
    pub point: [f64; 3],
    /// `I0 I1 ≠ 0`.
    pub regular_orbit: bool,
    /// Numeric rank of the Jacobian of the signature map.
    pub rank: Option<usize>,
    /// Best-conditioned triple among `m1, …, m5` and its smallest relative
    /// singular value.
    pub coordinates: Option<(Vec<String>, f64)>,
    pub regular: bool,
}

/// Checks the three regular-germ conditions of an ODE at a point.
pub fn regular_germ_check(ev: &Evaluator, point: [f64; 3]) -> GermReport {
    let names = crate::numeric::compiled_catalog(ev.kind, Chart::POSITIVE)
        .signature_names
        .clone();
    let Ok(sample) = ev.sample(point) else {
        return GermReport {
            point,
            regular_orbit: false,
            rank: None,
            coordinates: None,
            regular: false,
        };
    };
    let jac = signature_jacobian(ev, point, sample.chart, &[]);
    let rank = jac
        .as_ref()
        .map(|j| relative_singular_values(j, &sample.coords).iter().filter(|&&v| v > RANK_TOL).count());
    let coordinates = jac.map(|j| {
        let (subset, cond) = choose_chart_coordinates(ev.kind, &[(j, sample.coords.clone())], 3);
        (subset.iter().map(|&i| names[i].to_string()).collect(), cond)
    });
    let regular = rank == Some(3) && coordinates.as_ref().is_some_and(|(_, c)| *c > RANK_TOL);
    GermReport {
        point,
        regular_orbit: true,
        rank,
        coordinates,
        regular,
    }
}

/// One direction of the comparison: every `a` sample is matched into `b`.
struct Matching {
    compared: usize,
    matched: usize,
    max_residual: f64,
    worst: Option<Certificate>,
}

struct Side<'a> {
    ev: &'a Evaluator,
    samples: Vec<&'a SignatureSample>,
    grid: &'a Grid,
}

fn chart_values(s: &SignatureSample, chart: &[usize]) -> Vec<f64> {
    chart.iter().map(|&i| s.coords[i]).collect()
}

/// Solves `σ_b(x)[chart] = target` from `start` by Gauss-Newton with
/// minimum-norm steps.
fn refine(
    ev: &Evaluator,
    chart_sign: Chart,
    chart: &[usize],
    target: &[f64],
    start: [f64; 3],
) -> Option<SignatureSample> {
    let mut x = start;
    let mut best: Option<(f64, SignatureSample)> = None;
    for _ in 0..30 {
        let s = ev.sample(x).ok().filter(|s| s.chart == chart_sign)?;
        let r: Vec<f64> = chart.iter().zip(target).map(|(&i, t)| s.coords[i] - t).collect();
        let err = r
            .iter()
            .zip(target)
            .map(|(d, t)| d.abs() / t.abs().max(1.0))
            .fold(0.0, f64::max);
        let improved = best.as_ref().is_none_or(|(e, _)| err < *e);
        if improved {
            best = Some((err, s.clone()));
        }
        if err < 1e-14 || chart.is_empty() {
            break;
        }
        let j = signature_jacobian(ev, x, chart_sign, chart)?;
        let step = j
            .pseudo_inverse(1e-12)
            .ok()?
            * DVector::from_vec(r);
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        for a in 0..3 {
            x[a] -= step[a];
        }
        if step.norm() < 1e-15 * (1.0 + x.iter().map(|v| v.abs()).sum::<f64>()) {
            break;
        }
    }
    best.map(|(_, s)| s)
}

fn inside(grid: &Grid, x: [f64; 3], slack: f64) -> bool {
    (0..3).all(|a| {
        let [lo, hi] = grid.bounds[a];
        let pad = slack * (hi - lo).abs().max(1e-12);
        x[a] >= lo.min(hi) - pad && x[a] <= lo.max(hi) + pad
    })
}

fn match_into(a: &Side, b: &Side, chart_sign: Chart, chart: &[usize], cfg: &EquivConfig, names: &[&str]) -> Matching {
    use rayon::prelude::*;
    let scale: Vec<f64> = chart
        .iter()
        .map(|&i| {
            let (lo, hi) = b
                .samples
                .iter()
                .map(|s| s.coords[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            (hi - lo).max(1e-12)
        })
        .collect();
    let dist = |u: &[f64], v: &[f64]| -> f64 {
        u.iter()
            .zip(v)
            .zip(&scale)
            .map(|((x, y), s)| ((x - y) / s).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let b_chart: Vec<Vec<f64>> = b.samples.iter().map(|s| chart_values(s, chart)).collect();
    let k = cfg.neighbors.min(b.samples.len()).max(1);

    let results: Vec<Option<(f64, Certificate)>> = crate::numeric::with_pool(|| {
        a.samples
            .par_iter()
            .map(|sa| {
                let target = chart_values(sa, chart);
                let mut order: Vec<(f64, usize)> =
                    b_chart.iter().enumerate().map(|(j, c)| (dist(&target, c), j)).collect();
                order.sort_by(|x, y| x.0.total_cmp(&y.0));
                if chart.is_empty() {
                    let sb = b.samples[order[0].1];
                    return Some(worst_coordinate(sa, sb, names));
                }
                let near: Vec<usize> = order.iter().take(k).map(|&(_, j)| j).collect();
                let start = local_linear_base(&near, &b_chart, &b.samples, &target)
                    .unwrap_or(b.samples[near[0]].base);
                let refined = refine(b.ev, chart_sign, chart, &target, start)
                    .or_else(|| refine(b.ev, chart_sign, chart, &target, b.samples[near[0]].base))?;
                if !inside(b.grid, refined.base, 0.05) {
                    return None;
                }
                let matched_chart = chart
                    .iter()
                    .map(|&i| relative_gap(refined.coords[i], sa.coords[i]))
                    .fold(0.0, f64::max);
                if matched_chart > cfg.tau_match {
                    return None;
                }
                Some(worst_coordinate(sa, &refined, names))
            })
            .collect()
    });
    let mut m = Matching {
        compared: a.samples.len(),
        matched: 0,
        max_residual: 0.0,
        worst: None,
    };
    for (res, cert) in results.into_iter().flatten() {
        m.matched += 1;
        if res > m.max_residual || m.worst.is_none() {
            m.max_residual = res.max(m.max_residual);
            if res >= m.max_residual {
                m.worst = Some(cert);
            }
        }
    }
    m
}

fn worst_coordinate(sa: &SignatureSample, sb: &SignatureSample, names: &[&str]) -> (f64, Certificate) {
    let (i, r) = sa
        .coords
        .iter()
        .zip(&sb.coords)
        .map(|(x, y)| relative_gap(*x, *y))
        .enumerate()
        .fold((0, 0.0), |(bi, br), (i, r)| if r > br { (i, r) } else { (bi, br) });
    (
        r,
        Certificate::Residual {
            a: sa.base,
            b: sb.base,
            residual: r,
            coordinate: names[i].to_string(),
        },
    )
}

/// Affine least-squares fit of the base point as a function of the chart
/// coordinates, evaluated at `target`.
fn local_linear_base(
    near: &[usize],
    b_chart: &[Vec<f64>],
    samples: &[&SignatureSample],
    target: &[f64],
) -> Option<[f64; 3]> {
    let r = target.len();
    if near.len() < r + 1 {
        return None;
    }
    let a = DMatrix::from_fn(near.len(), r + 1, |i, j| if j == 0 { 1.0 } else { b_chart[near[i]][j - 1] - target[j - 1] });
    let rhs = DMatrix::from_fn(near.len(), 3, |i, j| samples[near[i]].base[j]);
    let sol = a.svd(true, true).solve(&rhs, 1e-12).ok()?;
    let out = [sol[(0, 0)], sol[(0, 1)], sol[(0, 2)]];
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// The most frequent rank among probes, the smaller one on ties.
fn typical_rank(ranks: &[usize]) -> Option<usize> {
    (0..=3)
        .map(|r| (ranks.iter().filter(|&&x| x == r).count(), std::cmp::Reverse(r)))
        .filter(|&(n, _)| n > 0)
        .max()
        .map(|(_, std::cmp::Reverse(r))| r)
}

fn range(samples: &[&SignatureSample], i: usize) -> [f64; 2] {
    samples.iter().map(|s| s.coords[i]).fold([f64::INFINITY, f64::NEG_INFINITY], |[l, h], v| [l.min(v), h.max(v)])
}

/// A coordinate whose ranges are separated by more than `10 τ`.
fn disjoint_range(a: &[&SignatureSample], b: &[&SignatureSample], names: &[&str], tau: f64) -> Option<Certificate> {
    (0..names.len()).find_map(|i| {
        let (ra, rb) = (range(a, i), range(b, i));
        let gap = (rb[0] - ra[1]).max(ra[0] - rb[1]);
        let mag = ra[0].abs().max(ra[1].abs()).max(rb[0].abs()).max(rb[1].abs()).max(1.0);
        (gap > 10.0 * tau * mag).then(|| Certificate::DisjointRange {
            coordinate: names[i].to_string(),
            a: ra,
            b: rb,
        })
    })
}

fn most_common_chart(a: &SignatureSet, b: &SignatureSet) -> Option<Chart> {
    let charts = crate::catalog::Chart::all(a.kind);
    charts
        .into_iter()
        .map(|c| {
            let na = a.samples.iter().filter(|s| s.chart == c).count();
            let nb = b.samples.iter().filter(|s| s.chart == c).count();
            (c, na.min(nb))
        })
        .filter(|&(_, n)| n > 0)
        .max_by_key(|&(_, n)| n)
        .map(|(c, _)| c)
}

/// Decides whether two sections have the same signature over their grids.
pub fn compare(
    a: &Evaluator,
    grid_a: &Grid,
    b: &Evaluator,
    grid_b: &Grid,
    cfg: &EquivConfig,
) -> Result<EquivalenceVerdict, NumericError> {
    if a.kind != b.kind {
        return Err(NumericError::WrongBundle {
            expected: a.kind,
            found: b.kind,
        });
    }
    let sa = sample_signature(a, grid_a);
    let sb = sample_signature(b, grid_b);
    Ok(compare_sets(a, &sa, grid_a, b, &sb, grid_b, cfg))
}

pub fn compare_sets(
    a: &Evaluator,
    sa: &SignatureSet,
    grid_a: &Grid,
    b: &Evaluator,
    sb: &SignatureSet,
    grid_b: &Grid,
    cfg: &EquivConfig,
) -> EquivalenceVerdict {
    let names = sa.names.clone();
    let mut diagnostics = vec![
        format!("regular samples: {} of {} and {} of {}", sa.samples.len(), sa.attempted, sb.samples.len(), sb.attempted),
    ];
    if sa.samples.len() < cfg.n_min || sb.samples.len() < cfg.n_min {
        diagnostics.push(format!("fewer than {} regular samples", cfg.n_min));
        return EquivalenceVerdict::inconclusive(diagnostics);
    }
    let Some(chart_sign) = most_common_chart(sa, sb) else {
        diagnostics.push("no common sign chart".into());
        return EquivalenceVerdict::inconclusive(diagnostics);
    };
    let side_a: Vec<&SignatureSample> = sa.samples.iter().filter(|s| s.chart == chart_sign).collect();
    let side_b: Vec<&SignatureSample> = sb.samples.iter().filter(|s| s.chart == chart_sign).collect();
    let chart_label = Some([chart_sign.i0.as_i64(), chart_sign.i1.as_i64()]);
    diagnostics.push(format!(
        "chart {:?}: {} and {} samples",
        chart_label.unwrap(),
        side_a.len(),
        side_b.len()
    ));

    if let Some(cert) = disjoint_range(&side_a, &side_b, &names, cfg.tau_match) {
        return EquivalenceVerdict {
            verdict: Verdict::NotEquivalent,
            matched: 0,
            compared: side_a.len(),
            max_residual: f64::NAN,
            chart: chart_label,
            chart_coordinates: Vec::new(),
            rank: None,
            certificate: Some(cert),
            diagnostics,
        };
    }

    let mut probes = Vec::new();
    let mut ranks = [Vec::new(), Vec::new()];
    for (side, (ev, samples)) in [(a, &side_a), (b, &side_b)].into_iter().enumerate() {
        for s in probe_samples(samples, 12) {
            if let Some(j) = signature_jacobian(ev, s.base, chart_sign, &[]) {
                let r = relative_singular_values(&j, &s.coords).iter().filter(|&&v| v > RANK_TOL).count();
                ranks[side].push(r);
                probes.push((j, s.coords.clone()));
            }
        }
    }
    let (Some(ra), Some(rb)) = (typical_rank(&ranks[0]), typical_rank(&ranks[1])) else {
        diagnostics.push("could not estimate the signature rank".into());
        return EquivalenceVerdict::inconclusive(diagnostics);
    };
    if ra != rb {
        diagnostics.push(format!("signature ranks differ: {ra} and {rb}"));
        return EquivalenceVerdict::inconclusive(diagnostics);
    }
    let (chart, cond) = choose_chart_coordinates(a.kind, &probes, ra);
    let chart_names: Vec<String> = chart.iter().map(|&i| names[i].to_string()).collect();
    diagnostics.push(format!("signature rank {ra}; chart coordinates {chart_names:?} (conditioning {cond:.3e})"));
    if ra > 0 && cond <= RANK_TOL {
        diagnostics.push("no well-conditioned chart coordinates".into());
        let mut v = EquivalenceVerdict::inconclusive(diagnostics);
        v.rank = Some(ra);
        return v;
    }

    let a_side = Side {
        ev: a,
        samples: side_a,
        grid: grid_a,
    };
    let b_side = Side {
        ev: b,
        samples: side_b,
        grid: grid_b,
    };
    let mut runs = vec![match_into(&a_side, &b_side, chart_sign, &chart, cfg, &names)];
    if cfg.symmetrize {
        runs.push(match_into(&b_side, &a_side, chart_sign, &chart, cfg, &names));
    }

    let mut verdicts = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut certificate = None;
    for (n, m) in runs.iter().enumerate() {
        let frac = m.matched as f64 / m.compared.max(1) as f64;
        diagnostics.push(format!(
            "direction {}: matched {} of {} ({:.0}%), max residual {:.3e}",
            n + 1,
            m.matched,
            m.compared,
            100.0 * frac,
            m.max_residual
        ));
        max_residual = max_residual.max(m.max_residual);
        let v = if m.matched > 0 && m.max_residual > 10.0 * cfg.tau_match {
            certificate = m.worst.clone();
            Verdict::NotEquivalent
        } else if frac < cfg.coverage {
            Verdict::Inconclusive
        } else if m.max_residual <= cfg.tau_match {
            Verdict::Equivalent
        } else {
            Verdict::Inconclusive
        };
        verdicts.push(v);
    }
    let verdict = if verdicts.contains(&Verdict::NotEquivalent) {
        Verdict::NotEquivalent
    } else if verdicts.iter().all(|&v| v == Verdict::Equivalent) {
        Verdict::Equivalent
    } else {
        Verdict::Inconclusive
    };
    if verdict == Verdict::Equivalent {
        certificate = None;
    }
    EquivalenceVerdict {
        verdict,
        matched: runs[0].matched,
        compared: runs[0].compared,
        max_residual,
        chart: chart_label,
        chart_coordinates: chart_names,
        rank: Some(ra),
        certificate,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_in_order() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(5, 3).len(), 10);
        assert_eq!(subsets(4, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn relative_gap_is_symmetric() {
        assert_eq!(relative_gap(1.0, 1.0), 0.0);
        assert_eq!(relative_gap(100.0, 101.0), relative_gap(101.0, 100.0));
        assert!((relative_gap(0.0, 1e-7) - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn verdict_exit_codes() {
        assert_eq!(Verdict::Equivalent.exit_code(), 0);
        assert_eq!(Verdict::NotEquivalent.exit_code(), 1);
        assert_eq!(Verdict::Inconclusive.exit_code(), 2);
        assert_eq!(serde_json::to_string(&Verdict::NotEquivalent).unwrap(), "\"not-equivalent\"");
    }
}
