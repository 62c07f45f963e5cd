//! Small estimators shared by the experiment protocols.

use nalgebra::{DMatrix, DVector};

/// Standard error of a binomial proportion.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).max(0.0).sqrt()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the sample variance, from the fourth central moment.
pub fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
}

/// Running sums for paired data. Merging in a fixed order keeps results
/// independent of how the pairs were split.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairMoments {
    pub n: u64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
    /// Σ (xy)², for the standard error of the covariance.
    sxy2: f64,
}

impl PairMoments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
        self.sxy2 += (x * y) * (x * y);
    }

    pub fn merge(&mut self, o: &PairMoments) {
        self.n += o.n;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.syy += o.syy;
        self.sxy += o.sxy;
        self.sxy2 += o.sxy2;
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn mean_x(&self) -> f64 {
        self.sx / self.nf()
    }

    pub fn mean_y(&self) -> f64 {
        self.sy / self.nf()
    }

    pub fn var_x(&self) -> f64 {
        (self.sxx - self.sx * self.sx / self.nf()) / (self.nf() - 1.0)
    }

    pub fn var_y(&self) -> f64 {
        (self.syy - self.sy * self.sy / self.nf()) / (self.nf() - 1.0)
    }

    pub fn covariance(&self) -> f64 {
        (self.sxy - self.sx * self.sy / self.nf()) / (self.nf() - 1.0)
    }

    /// `⟨xy⟩` without centering and its standard error.
    pub fn raw_product(&self) -> (f64, f64) {
        let m = self.sxy / self.nf();
        let var = (self.sxy2 / self.nf() - m * m).max(0.0);
        (m, (var / self.nf()).sqrt())
    }

    /// Pearson correlation; zero when either variance vanishes.
    pub fn pearson(&self) -> f64 {
        let d = (self.var_x() * self.var_y()).sqrt();
        if self.n < 2 || !(d > 0.0) {
            0.0
        } else {
            (self.covariance() / d).clamp(-1.0, 1.0)
        }
    }

    /// Large-sample standard error `(1 − r²)/√(n − 1)`.
    pub fn pearson_se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let r = self.pearson();
        (1.0 - r * r) / (self.nf() - 1.0).sqrt()
    }
}

/// `y ≈ c + a cos φ − b sin φ`, written as `c + A cos(φ + δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub amplitude_se: f64,
    pub phase_se: f64,
}

/// Weighted least squares of `y = c + A cos(φ + δ)` (or without `c` when
/// `with_offset` is false). Weights are `1/σ²`; zero `σ` counts as unit
/// weight. Returns `None` when the design is singular.
pub fn fit_cosine(phases: &[f64], ys: &[f64], sigmas: &[f64], with_offset: bool) -> Option<CosineFit> {
    let k = if with_offset { 3 } else { 2 };
    if phases.len() < k {
        return None;
    }
    let mut ata = DMatrix::<f64>::zeros(k, k);
    let mut aty = DVector::<f64>::zeros(k);
    for ((&phi, &y), &s) in phases.iter().zip(ys).zip(sigmas) {
        let w = if s > 0.0 { 1.0 / (s * s) } else { 1.0 };
        let mut row = vec![phi.cos(), -phi.sin()];
        if with_offset {
            row.push(1.0);
        }
        for i in 0..k {
            aty[i] += w * row[i] * y;
            for j in 0..k {
                ata[(i, j)] += w * row[i] * row[j];
            }
        }
    }
    let cov = ata.try_inverse()?;
    let beta = &cov * aty;
    let (a, b) = (beta[0], beta[1]);
    let amplitude = a.hypot(b);
    // δ-method through A = √(a²+b²), δ = atan2(b, a)
    let (amplitude_se, phase_se) = if amplitude > 0.0 {
        let ga = [a / amplitude, b / amplitude];
        let gd = [-b / (amplitude * amplitude), a / (amplitude * amplitude)];
        let quad = |g: [f64; 2]| {
            (g[0] * g[0] * cov[(0, 0)] + 2.0 * g[0] * g[1] * cov[(0, 1)] + g[1] * g[1] * cov[(1, 1)]).max(0.0).sqrt()
        };
        (quad(ga), quad(gd))
    } else {
        (cov[(0, 0)].max(0.0).sqrt(), 0.0)
    };
    Some(CosineFit {
        offset: if with_offset { beta[2] } else { 0.0 },
        amplitude,
        phase: b.atan2(a),
        amplitude_se,
        phase_se,
    })
}

/// `n` phases evenly spaced over `[0, span)`.
pub fn uniform_phases(n: usize, span: f64) -> Vec<f64> {
    (0..n).map(|i| span * i as f64 / n as f64).collect()
}
