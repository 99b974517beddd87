//! Exhaustive-search maximum-likelihood detection.

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::constellation::CandidateSet;

/// One ML detection instance: find `x'` minimizing `‖y − g·Ĥ·x'‖²`.
#[derive(Clone, Copy, Debug)]
pub struct DetectionProblem<'a> {
    pub received: &'a [Complex64],
    pub estimated_h: &'a ChannelMatrix,
    /// `√(E_s/M)` on relay hops, `√(2E_s/M)` on the direct link.
    pub gain: f64,
    pub candidates: &'a CandidateSet,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection<'a> {
    pub index: usize,
    pub label: &'a [u8],
    pub metric: f64,
}

/// Squared Euclidean distance between `y` and `g·H·x`.
pub fn ml_metric(y: &[Complex64], h: &ChannelMatrix, gain: f64, x: &[Complex64]) -> f64 {
    let hx = h.mul_vec(x);
    y.iter().zip(&hx).map(|(yi, hi)| (yi - hi * gain).norm_sqr()).sum()
}

/// Evaluates the metric for every candidate; the first minimum wins ties.
pub fn ml_detect<'a>(problem: &DetectionProblem<'a>) -> Detection<'a> {
    assert!(problem.gain > 0.0);
    let mut best = 0;
    let mut best_metric = f64::INFINITY;
    for (k, (x, _)) in problem.candidates.iter().enumerate() {
        let metric = ml_metric(problem.received, problem.estimated_h, problem.gain, x);
        if metric < best_metric {
            best = k;
            best_metric = metric;
        }
    }
    Detection {
        index: best,
        label: problem.candidates.label(best),
        metric: best_metric,
    }
}

/// ML detector for a fixed channel estimate and gain.
///
/// The noiseless images `g·Ĥ·x'` of all candidates are computed once, so
/// detecting a block of symbol vectors under one channel draw costs
/// `N_s^M · M` complex distance terms per vector.
#[derive(Clone, Debug)]
pub struct MlDetector {
    m: usize,
    images: Vec<Complex64>,
}

impl MlDetector {
    pub fn new(estimated_h: &ChannelMatrix, gain: f64, candidates: &CandidateSet) -> Self {
        let m = candidates.antennas();
        let mut images = vec![Complex64::new(0.0, 0.0); candidates.len() * m];
        for ((x, _), out) in candidates.iter().zip(images.chunks_exact_mut(m)) {
            estimated_h.mul_vec_into(x, out);
            for z in out.iter_mut() {
                *z *= gain;
            }
        }
        MlDetector { m, images }
    }

    /// Index of the closest candidate image (lowest index on ties).
    pub fn detect(&self, received: &[Complex64]) -> usize {
        debug_assert_eq!(received.len(), self.m);
        let mut best = 0;
        let mut best_metric = f64::INFINITY;
        for (k, image) in self.images.chunks_exact(self.m).enumerate() {
            let metric: f64 = received
                .iter()
                .zip(image)
                .map(|(y, r)| (y - r).norm_sqr())
                .sum();
            if metric < best_metric {
                best = k;
                best_metric = metric;
            }
        }
        best
    }
}
