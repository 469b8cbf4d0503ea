//! Run configuration: one flat JSON document, documented keys, unknown
//! keys rejected.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_grid() -> usize {
    64
}
fn default_k_max() -> usize {
    8
}
fn default_epsilon() -> f64 {
    0.2
}
fn default_galerkin() -> usize {
    16
}
fn default_mass() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    5e-3
}
fn default_t_final() -> f64 {
    0.5
}
fn default_samples() -> usize {
    1000
}
fn default_seed() -> u64 {
    2026
}
fn default_mollifier() -> String {
    "gaussian".into()
}
fn default_variant() -> String {
    "quartic_only".into()
}
fn default_wick_reference() -> String {
    "agff_profile".into()
}
fn default_sampler() -> String {
    "independence_mh".into()
}
fn default_noise() -> String {
    "white".into()
}
fn default_burn_in() -> usize {
    2000
}
fn default_thin() -> usize {
    20
}
fn default_order() -> usize {
    2
}

/// The effective configuration of a run. Admissible ranges: `grid_n` even
/// and at least 8; `1 <= k_max <= grid_n/6` (dealiasing rule); `epsilon >
/// 0`; `dt > 0` and below the stability rule `0.5/omega_N`; sample counts
/// at least 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_galerkin")]
    pub galerkin_n: usize,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_t_final")]
    pub t_evolve: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub outdir: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
    /// `gaussian` or `sharp_cutoff`.
    #[serde(default = "default_mollifier")]
    pub mollifier: String,
    /// `quartic_only` or `quartic_plus_k`.
    #[serde(default = "default_variant")]
    pub gibbs_variant: String,
    /// `agff_profile` or `gff_constant`.
    #[serde(default = "default_wick_reference")]
    pub wick_reference: String,
    /// `independence_mh`, `pcn` or `importance`.
    #[serde(default = "default_sampler")]
    pub sampler: String,
    /// `white` or `zero` (the noiseless control operator).
    #[serde(default = "default_noise")]
    pub noise: String,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Wick power order for the `wick` and `tails` commands.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Binary snapshot stride for trajectory/ensemble exports (0 = none).
    #[serde(default)]
    pub snapshot_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("defaults")
    }
}

impl RunConfig {
    /// Load from a JSON file (when given), apply `--set key=value`
    /// overrides, then the dedicated flag overrides.
    pub fn load(
        path: Option<&Path>,
        sets: &[String],
        seed: Option<u64>,
        outdir: Option<String>,
        threads: Option<usize>,
    ) -> Result<Self> {
        let mut value: serde_json::Value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| "parsing config JSON")?
            }
            None => serde_json::json!({}),
        };
        let map = value
            .as_object_mut()
            .context("config root must be a JSON object")?;
        for set in sets {
            let (key, raw) = set
                .split_once('=')
                .with_context(|| format!("override '{set}' is not key=value"))?;
            let parsed: serde_json::Value = match serde_json::from_str(raw) {
                Ok(v) => v,
                Err(_) => serde_json::Value::String(raw.to_string()),
            };
            map.insert(key.to_string(), parsed);
        }
        let mut cfg: RunConfig = serde_json::from_value(value)
            .map_err(|e| anyhow::anyhow!("config error: {e}"))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(o) = outdir {
            cfg.outdir = Some(o);
        }
        if let Some(t) = threads {
            cfg.threads = Some(t);
        }
        Ok(cfg)
    }

    /// Static diagnostics: violated invariants and cross-field rules,
    /// without executing anything. Empty means valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            out.push(format!("grid_n = {} must be even and at least 8", self.grid_n));
        }
        if self.k_max == 0 || 6 * self.k_max > self.grid_n {
            out.push(format!(
                "dealiasing rule violated: need 1 <= k_max <= grid_n/6, got k_max = {} on grid {}",
                self.k_max, self.grid_n
            ));
        }
        if self.epsilon <= 0.0 {
            out.push("epsilon must be positive".into());
        } else if self.epsilon * (self.grid_n as f64 / 2.0 - 1.0) < 3.0 {
            out.push(format!(
                "resolution rule violated: epsilon * (grid_n/2 - 1) = {:.2} < 3, the grid cannot resolve the mollified noise",
                self.epsilon * (self.grid_n as f64 / 2.0 - 1.0)
            ));
        }
        if self.mass <= 0.0 {
            out.push("mass must be positive".into());
        }
        if self.dt <= 0.0 {
            out.push("dt must be positive".into());
        } else {
            // stability rule against the zero-noise proxy of lambda_N
            let mut lattice: Vec<i64> = Vec::new();
            let r = self.k_max as i64;
            for k1 in -r..=r {
                for k2 in -r..=r {
                    if k1 * k1 + k2 * k2 <= r * r {
                        lattice.push(k1 * k1 + k2 * k2);
                    }
                }
            }
            lattice.sort_unstable();
            let idx = self.galerkin_n.min(lattice.len()).saturating_sub(1);
            let omega = ((lattice[idx] as f64) + self.mass).sqrt();
            if self.dt > 0.5 / omega {
                out.push(format!(
                    "step rule violated: dt = {} exceeds 0.5/omega_N ~ {:.4} (zero-noise proxy for N = {})",
                    self.dt,
                    0.5 / omega,
                    self.galerkin_n
                ));
            }
        }
        if self.galerkin_n == 0 {
            out.push("galerkin_n must be at least 1".into());
        }
        if self.n_samples == 0 {
            out.push("n_samples must be at least 1".into());
        }
        if self.thin == 0 {
            out.push("thin must be at least 1".into());
        }
        for (field, value, allowed) in [
            (
                "mollifier",
                self.mollifier.as_str(),
                &["gaussian", "sharp_cutoff"][..],
            ),
            (
                "gibbs_variant",
                self.gibbs_variant.as_str(),
                &["quartic_only", "quartic_plus_k"][..],
            ),
            (
                "wick_reference",
                self.wick_reference.as_str(),
                &["agff_profile", "gff_constant"][..],
            ),
            (
                "sampler",
                self.sampler.as_str(),
                &["independence_mh", "pcn", "importance"][..],
            ),
            ("noise", self.noise.as_str(), &["white", "zero"][..]),
        ] {
            if !allowed.contains(&value) {
                out.push(format!("{field} = '{value}' not in {allowed:?}"));
            }
        }
        out
    }

    pub fn require_valid(&self) -> Result<()> {
        let diags = self.diagnostics();
        if diags.is_empty() {
            Ok(())
        } else {
            bail!("invalid config:\n  {}", diags.join("\n  "))
        }
    }

    pub fn mollifier_obj(&self) -> anderson_lab::Mollifier {
        match self.mollifier.as_str() {
            "sharp_cutoff" => anderson_lab::Mollifier::sharp(self.epsilon),
            _ => anderson_lab::Mollifier::gaussian(self.epsilon),
        }
    }

    pub fn variant_obj(&self) -> anderson_lab::gibbs::GibbsVariant {
        match self.gibbs_variant.as_str() {
            "quartic_plus_k" => anderson_lab::gibbs::GibbsVariant::QuarticPlusK,
            _ => anderson_lab::gibbs::GibbsVariant::QuarticOnly,
        }
    }

    pub fn wick_reference_obj(&self) -> anderson_lab::gibbs::WickReference {
        match self.wick_reference.as_str() {
            "gff_constant" => anderson_lab::gibbs::WickReference::GffConstant,
            _ => anderson_lab::gibbs::WickReference::AgffProfile,
        }
    }
}
