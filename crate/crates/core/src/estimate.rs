//! Error budgets, the Psi-image projection check, and verification sweeps
//! of the counting theorem with an empirically fitted constant.

use rayon::prelude::*;

use crate::counting::count_points_with_budget;
use crate::davenport::{estimate_h, rotated_line_count, DavenportOptions};
use crate::error::{Error, Result};
use crate::lattice::{LatticeProfile, Lattice};
use crate::matrix::Matrix;
use crate::rat::{parse_rat, to_f64, Rat};
use crate::semialg::FamilySpec;
use crate::volume::{
    gram_volume, index_sets, unit_ball_volume, view_projection, view_volume, vj_prime_sampled, Estimate,
    VolumeEstimate, VolumeOptions, View,
};

/// `sum_{j<n} V_j / (lambda_1 ... lambda_j)`; `vj[0]` is the constant term.
pub fn error_budget_main(vj: &[f64], minima: &[f64]) -> f64 {
    let mut prod = 1.0;
    let mut total = 0.0;
    for (j, v) in vj.iter().enumerate() {
        if j > 0 {
            prod *= minima[j - 1];
        }
        total += v / prod;
    }
    total
}

/// `sum_{j<n} h^(n-j) V_j` with `n = vj.len()`.
pub fn error_budget_davenport(h: usize, vj: &[f64]) -> f64 {
    let n = vj.len();
    vj.iter()
        .enumerate()
        .map(|(j, v)| (h as f64).powi((n - j) as i32) * v)
        .sum()
}

/// `sum_{j<n} h'^(n-j) V'_j / (lambda_1 ... lambda_j)`.
pub fn error_budget_thunder(h: usize, vj_prime: &[f64], minima: &[f64]) -> f64 {
    let n = vj_prime.len();
    let mut prod = 1.0;
    let mut total = 0.0;
    for (j, v) in vj_prime.iter().enumerate() {
        if j > 0 {
            prod *= minima[j - 1];
        }
        total += (h as f64).powi((n - j) as i32) * v / prod;
    }
    total
}

/// `(j^(3/2) n! 2^n / B_n)^j`.
pub fn lemma_vi_constant(n: usize, j: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let base = (j as f64).powf(1.5) * fact * 2f64.powi(n as i32) / unit_ball_volume(n);
    base.powi(j as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiTerm {
    pub index_set: Vec<usize>,
    /// `2^j / B_j * sqrt(det Gram(v_I)) / (lambda_1 ... lambda_j)`.
    pub coefficient: f64,
    /// `j`-volume of the projection of `Psi(Z_T)` to the coordinates `I`.
    pub projection: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiCheck {
    pub j: usize,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub terms: Vec<PsiTerm>,
    pub ok: bool,
}

/// Compares `V_j(Psi(Z_T))` with the sum over `I` of the volumes of the
/// projections of `Z_T` to the span of `v_I` along the other Mahler vectors,
/// weighted as in the projection lemma.
///
/// Both sides use the same coordinate projections of `Psi(Z_T)`: the
/// projection of `Z_T` to `span(v_I)` is their image under `v_I`, whose
/// `j`-volume scales by `sqrt(det Gram(v_I))`.
pub fn check_psi_v(profile: &LatticeProfile, f: &FamilySpec, t: &[Rat], j: usize, opts: &VolumeOptions) -> Result<PsiCheck> {
    let n = profile.lattice.dim();
    Error::check_dim(f.num_vars(), n)?;
    if j == 0 || j >= n {
        return Err(Error::InvalidInput(format!("projection check needs 1 <= j < n = {n}")));
    }
    f.fiber_box(t)?;
    let view = View::linear(f.fiber(t)?, &profile.psi.inverse)?;
    let weight = 2f64.powi(j as i32) / unit_ball_volume(j) / profile.minima.product(j);
    let mut terms = Vec::new();
    let (mut lhs, mut rhs) = (Estimate::exact(0.0), Estimate::exact(0.0));
    for set in index_sets(n, j) {
        let projection = view_projection(&view, &set, opts)?;
        let coefficient = weight * gram_volume(&profile.psi.inverse, &set);
        lhs = lhs + projection;
        rhs = rhs + projection.scale(coefficient);
        terms.push(PsiTerm {
            index_set: set,
            coefficient,
            projection,
        });
    }
    let ok = lhs.value <= rhs.value + lhs.error + rhs.error;
    Ok(PsiCheck { j, lhs, rhs, terms, ok })
}

/// Parses `start:end:step` (rationals, inclusive end) or a comma-separated
/// list of rationals.
pub fn parse_sweep(text: &str) -> Result<Vec<Rat>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step) = (parse_rat(start)?, parse_rat(end)?, parse_rat(step)?);
            if step <= Rat::from_integer(0.into()) {
                return Err(Error::InvalidInput("sweep step must be positive".into()));
            }
            let mut out = Vec::new();
            let mut t = start;
            while t <= end {
                out.push(t.clone());
                t += &step;
                if out.len() > 1_000_000 {
                    return Err(Error::InvalidInput("sweep has more than 10^6 points".into()));
                }
            }
            Ok(out)
        }
        [list] => list.split(',').map(|s| parse_rat(s.trim())).collect(),
        _ => Err(Error::InvalidInput(format!("bad sweep '{text}': expected start:end:step"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub volume: VolumeOptions,
    pub davenport: DavenportOptions,
    /// Frames for `V'_j` and for rotated line counts.
    pub rotations: usize,
    /// Compute the Davenport and rotated-frame budgets.
    pub diagnostics: bool,
    pub count_budget: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            volume: VolumeOptions::default(),
            davenport: DavenportOptions::default(),
            rotations: 64,
            diagnostics: true,
            count_budget: crate::counting::default_budget(),
        }
    }
}

impl VerifyOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.volume.seed = seed;
        self.davenport.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub t: Vec<Rat>,
    pub count: u64,
    pub boundary_hits: u64,
    pub volume: VolumeEstimate,
    pub det: Rat,
    /// `Vol / det`.
    pub main_term: f64,
    pub deviation: f64,
    /// `V_0 .. V_{n-1}`.
    pub vj: Vec<Estimate>,
    pub minima: Vec<f64>,
    pub budget_main: f64,
    pub budget_davenport: Option<f64>,
    pub budget_thunder: Option<f64>,
    /// Sampled `V'_0 .. V'_{n-1}`.
    pub vj_prime: Option<Vec<f64>>,
    pub h_full: Option<usize>,
    pub h_overall: Option<usize>,
    pub h_prime: Option<usize>,
    pub ratio_main: f64,
    /// The volume error bar exceeds a tenth of the deviation.
    pub inconclusive: bool,
    pub seed: u64,
}

impl VerifyReport {
    /// `Vol` error bar divided by `det`, relative to `budget_main`.
    pub fn error_contribution(&self) -> f64 {
        self.volume.estimate.error / to_f64(&self.det) / self.budget_main
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantFit {
    pub family: String,
    pub lattice: String,
    pub sweep: String,
    /// Largest `deviation / budget_main` over the sweep.
    pub c_fit: f64,
    pub trace: Vec<(Vec<Rat>, f64)>,
    /// Largest `error_contribution` over the sweep.
    pub error_contribution: f64,
    /// Indices of inconclusive sweep points.
    pub inconclusive: Vec<usize>,
}

impl ConstantFit {
    pub fn from_reports(reports: &[VerifyReport]) -> Self {
        let trace: Vec<(Vec<Rat>, f64)> = reports.iter().map(|r| (r.t.clone(), r.ratio_main)).collect();
        Self {
            family: String::new(),
            lattice: String::new(),
            sweep: String::new(),
            c_fit: trace.iter().map(|(_, r)| *r).fold(0.0, f64::max),
            trace,
            error_contribution: reports.iter().map(VerifyReport::error_contribution).fold(0.0, f64::max),
            inconclusive: reports
                .iter()
                .enumerate()
                .filter(|(_, r)| r.inconclusive)
                .map(|(i, _)| i)
                .collect(),
        }
    }
}

/// One sweep point.
pub fn verify_point(profile: &LatticeProfile, f: &FamilySpec, t: &[Rat], opts: &VerifyOptions) -> Result<VerifyReport> {
    let l = &profile.lattice;
    let n = l.dim();
    Error::check_dim(f.num_vars(), n)?;
    f.fiber_box(t)?;
    let count = count_points_with_budget(l, f, t, opts.count_budget)?;
    let view = View::of_fiber(f.fiber(t)?);
    let volume = view_volume(&view, &opts.volume)?;
    let mut vj = vec![Estimate::exact(1.0)];
    for j in 1..n {
        let mut acc = Estimate::exact(0.0);
        for set in index_sets(n, j) {
            acc = acc + view_projection(&view, &set, &opts.volume)?;
        }
        vj.push(acc);
    }
    let det = to_f64(&profile.det);
    let minima = profile.minima.minima();
    let main_term = volume.estimate.value / det;
    let deviation = (count.count as f64 - main_term).abs();
    let values: Vec<f64> = vj.iter().map(|e| e.value).collect();
    let budget_main = error_budget_main(&values, &minima);
    let (mut budget_davenport, mut budget_thunder, mut vj_prime) = (None, None, None);
    let (mut h_full, mut h_overall, mut h_prime) = (None, None, None);
    if opts.diagnostics {
        let h = estimate_h(f, t, &opts.davenport)?;
        let hd = h.h_overall.max(1);
        budget_davenport = Some(error_budget_davenport(hd, &values));
        let rotated = rotated_line_count(f, t, opts.rotations, 8, opts.davenport.seed)?;
        let hp = hd.max(rotated);
        let mut vp = vec![1.0];
        for j in 1..n {
            vp.push(vj_prime_sampled(f, t, j, opts.rotations, &opts.volume)?.max);
        }
        budget_thunder = Some(error_budget_thunder(hp, &vp, &minima));
        vj_prime = Some(vp);
        h_full = Some(h.h_full);
        h_overall = Some(h.h_overall);
        h_prime = Some(hp);
    }
    Ok(VerifyReport {
        t: t.to_vec(),
        count: count.count,
        boundary_hits: count.boundary_hits,
        inconclusive: volume.estimate.error / det > 0.1 * deviation,
        volume,
        det: profile.det.clone(),
        main_term,
        deviation,
        vj,
        minima,
        budget_main,
        budget_davenport,
        budget_thunder,
        vj_prime,
        h_full,
        h_overall,
        h_prime,
        ratio_main: deviation / budget_main,
        seed: opts.volume.seed,
    })
}

/// Runs [`verify_point`] over a sweep of single-parameter values and fits
/// `c = max deviation / budget_main`.
pub fn verify_main_theorem(
    l: &Lattice,
    f: &FamilySpec,
    sweep: &[Rat],
    opts: &VerifyOptions,
) -> Result<(Vec<VerifyReport>, ConstantFit)> {
    if f.num_params() != 1 {
        return Err(Error::InvalidInput(format!(
            "sweeps need a one-parameter family, this one has {}",
            f.num_params()
        )));
    }
    let profile = LatticeProfile::new(l)?;
    let reports = sweep
        .par_iter()
        .map(|t| verify_point(&profile, f, std::slice::from_ref(t), opts))
        .collect::<Result<Vec<_>>>()?;
    let fit = ConstantFit::from_reports(&reports);
    Ok((reports, fit))
}

/// `diag(values)` as a lattice basis, for the common test lattices.
pub fn diagonal_lattice(values: &[Rat]) -> Result<Lattice> {
    Lattice::new(Matrix::diagonal(values))
}
