//! Leakage reports and guarantee certificates.

use serde::{Deserialize, Serialize};

/// One feature's leakage assessment under a fixed conditioning order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeakageEntry {
    /// Position in the conditioning order (0-based; prefix j = position + 1).
    pub position: usize,
    /// Original feature index before ordering.
    pub feature: usize,
    /// max over attribute values of |estimated i(s; x_j | x^{j-1})|.
    pub max_abs_cond_density: f64,
    pub leaking: bool,
}

/// Per-feature conditional density magnitudes and leaking flags for one
/// sample. `ordering[p]` is the original index of the feature evaluated at
/// position p.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeakageReport {
    pub eps: f64,
    pub ordering: Vec<usize>,
    pub entries: Vec<LeakageEntry>,
}

impl LeakageReport {
    pub fn leaking_positions(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.leaking)
            .map(|e| e.position)
            .collect()
    }

    pub fn leaking_features(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.leaking)
            .map(|e| e.feature)
            .collect()
    }

    pub fn num_leaking(&self) -> usize {
        self.entries.iter().filter(|e| e.leaking).count()
    }
}

/// The (eps, delta) accounting: a per-feature E_gamma bound and its
/// composition over all m features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuaranteeCertificate {
    pub per_feature_eps: f64,
    pub per_feature_delta: f64,
    pub composed_eps: f64,
    pub composed_delta: f64,
    pub k_radius: f64,
    pub lambda: f64,
    pub m: usize,
    /// Scope note carried verbatim into serialized certificates.
    pub caveat: String,
}

/// The composed guarantee presumes each released feature's mechanism meets
/// the per-feature E-gamma constraint. An unperturbed (unflagged) feature
/// meets the conditional-information-density threshold, which is a
/// different statement; the certificate is conditional on the per-feature
/// constraints holding for all m features.
pub const CERTIFICATE_CAVEAT: &str = "composed bound presumes every per-feature mechanism \
satisfies the per-feature E-gamma constraint; an unflagged feature released unperturbed \
meets the conditional-information-density threshold, which is not by itself that constraint";

impl GuaranteeCertificate {
    pub fn render_text(&self) -> String {
        format!(
            "guarantee certificate\n  per-feature: eps = {}, delta/m = {:.6}\n  \
             composed:    eps = {}, delta = {:.6}\n  calibration: K = {}, lambda = {}, m = {}\n  \
             note: {}\n",
            self.per_feature_eps,
            self.per_feature_delta,
            self.composed_eps,
            self.composed_delta,
            self.k_radius,
            self.lambda,
            self.m,
            self.caveat
        )
    }
}
