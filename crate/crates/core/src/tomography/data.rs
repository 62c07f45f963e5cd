//! Phase-tagged homodyne sample sets, their CSV form, and histogramming.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::QuadratureSample;

pub const MIN_BINS: usize = 20;
pub const MIN_PHASES: usize = 3;

/// Samples recorded at one LO phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSamples {
    pub theta: f64,
    pub xs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleSet {
    pub phases: Vec<PhaseSamples>,
}

impl SampleSet {
    /// Groups samples by exact LO phase, phases in order of first appearance.
    pub fn from_samples(samples: &[QuadratureSample]) -> Self {
        let mut phases: Vec<PhaseSamples> = Vec::new();
        for s in samples {
            match phases.iter_mut().find(|p| p.theta.to_bits() == s.theta.to_bits()) {
                Some(p) => p.xs.push(s.x),
                None => phases.push(PhaseSamples { theta: s.theta, xs: vec![s.x] }),
            }
        }
        Self { phases }
    }

    pub fn len(&self) -> usize {
        self.phases.iter().map(|p| p.xs.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `theta,x` CSV with header, one sample per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,x\n");
        for p in &self.phases {
            for x in &p.xs {
                let _ = writeln!(out, "{},{}", p.theta, x);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "theta,x" => {}
            _ => return Err(Error::SampleFormat("expected header `theta,x`".into())),
        }
        let mut samples = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parse = |field: Option<&str>| -> Result<f64> {
                field
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::SampleFormat(format!("line {}: expected two finite numbers", i + 1)))
            };
            let mut fields = line.split(',');
            let theta = parse(fields.next())?;
            let x = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(Error::SampleFormat(format!("line {}: too many fields", i + 1)));
            }
            samples.push(QuadratureSample { x, theta, mode: 0, trial_index: samples.len() as u64 });
        }
        Ok(Self::from_samples(&samples))
    }
}

/// Histograms of every phase over one common set of bin edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedData {
    pub edges: Vec<f64>,
    pub phases: Vec<f64>,
    /// `counts[phase][bin]`
    pub counts: Vec<Vec<u64>>,
    pub totals: Vec<u64>,
}

impl BinnedData {
    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.totals.iter().sum()
    }
}

pub fn bin_samples(set: &SampleSet, n_bins: usize) -> Result<BinnedData> {
    if n_bins < MIN_BINS {
        return Err(Error::Domain(format!("need at least {MIN_BINS} bins, got {n_bins}")));
    }
    let non_empty = set.phases.iter().filter(|p| !p.xs.is_empty()).count();
    if non_empty < MIN_PHASES || non_empty != set.phases.len() {
        return Err(Error::TooFewPhases { found: non_empty });
    }
    let (mut lo, mut hi) = set
        .phases
        .iter()
        .flat_map(|p| p.xs.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::SampleFormat("non-finite quadrature sample".into()));
    }
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins).map(|i| if i == n_bins { hi } else { lo + i as f64 * width }).collect();
    let mut counts = Vec::with_capacity(set.phases.len());
    for p in &set.phases {
        let mut c = vec![0u64; n_bins];
        for &x in &p.xs {
            let b = (((x - lo) / width).floor() as isize).clamp(0, n_bins as isize - 1) as usize;
            c[b] += 1;
        }
        counts.push(c);
    }
    Ok(BinnedData {
        edges,
        phases: set.phases.iter().map(|p| p.theta).collect(),
        totals: set.phases.iter().map(|p| p.xs.len() as u64).collect(),
        counts,
    })
}
