//! Geographic instance generation and supply/cost ratios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amount::{pow10, round_to_scale};
use crate::error::{Error, Result};
use crate::model::{Candidate, Instance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    /// Base fixed cost per unit of capacity.
    pub mu: f64,
    /// Half-width of the uniform perturbation added to `mu`.
    pub epsilon: f64,
    /// Multiplier applied to every base capacity.
    pub capacity_factor: f64,
    /// Multiplier applied to every fixed cost.
    pub uplift: f64,
    pub seed: u64,
    /// Minimum number of decimals in the generated instance.
    pub scale: u32,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            mu: 1.0,
            epsilon: 0.1,
            capacity_factor: 1.0,
            uplift: 1.0,
            seed: 0,
            scale: 2,
        }
    }
}

impl GeneratorParams {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.mu - self.epsilon > 0.0) {
            return Err(Error::Config("need epsilon >= 0 and mu - epsilon > 0".into()));
        }
        if !(self.capacity_factor > 0.0 && self.uplift > 0.0) {
            return Err(Error::Config("capacity factor and uplift must be positive".into()));
        }
        Ok(())
    }
}

/// Derives a geographic instance from `base`: capacities are scaled by the
/// capacity factor, `f_i = (mu + eps_i) * s_i * uplift` with `s_i` the base
/// capacity and one uniform draw `eps_i` in `[-epsilon, epsilon]` per
/// candidate, and `c_ij = dist(i, j) * d_j`.
pub fn generate_geographic(base: &Instance, params: &GeneratorParams) -> Result<Instance> {
    params.validate()?;
    let coords = base
        .coords()
        .ok_or_else(|| Error::Config("generation needs unit coordinates".into()))?;
    let scale = base.scale().max(params.scale);
    let lift = pow10(scale - base.scale()) as i64;
    let unit = 10f64.powi(base.scale() as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let demands: Vec<i64> = base.demands().iter().map(|&d| d * lift).collect();
    let mut candidates = Vec::with_capacity(base.m());
    let mut costs = Vec::with_capacity(base.m() * base.n());
    for (i, cand) in base.candidates().iter().enumerate() {
        let site = cand
            .site
            .ok_or_else(|| Error::Config(format!("candidate {i} has no unit")))?;
        let eps: f64 = rng.gen_range(-params.epsilon..=params.epsilon);
        let s = cand.capacity as f64 / unit;
        candidates.push(Candidate {
            site: Some(site),
            capacity: round_to_scale(s * params.capacity_factor, scale),
            fixed_cost: round_to_scale((params.mu + eps) * s * params.uplift, scale),
        });
        for (j, &d) in base.demands().iter().enumerate() {
            let dist = coords[site].distance(coords[j]);
            costs.push(round_to_scale(dist * d as f64 / unit, scale));
        }
    }
    Instance::new(scale, demands, candidates, costs, Some(coords.to_vec()))
}

/// One member of the capacity x uplift sweep.
#[derive(Debug, Clone)]
pub struct SweepMember {
    /// Group letter and uplift level, e.g. `A1` or `C5`.
    pub label: String,
    pub params: GeneratorParams,
    pub instance: Instance,
}

pub const SWEEP_CAPACITY_FACTORS: [f64; 3] = [1.0, 1.2, 1.4];
pub const SWEEP_UPLIFTS: [f64; 5] = [1.0, 1.1, 1.2, 1.3, 1.4];

/// The 15 combinations of capacity factor and fixed-cost uplift. All members
/// share the same seed, so they share the same perturbations.
pub fn sweep(base: &Instance, template: &GeneratorParams) -> Result<Vec<SweepMember>> {
    let mut out = Vec::with_capacity(15);
    for (g, &capacity_factor) in SWEEP_CAPACITY_FACTORS.iter().enumerate() {
        for (u, &uplift) in SWEEP_UPLIFTS.iter().enumerate() {
            let params = GeneratorParams {
                capacity_factor,
                uplift,
                ..*template
            };
            out.push(SweepMember {
                label: format!("{}{}", (b'A' + g as u8) as char, u + 1),
                params,
                instance: generate_geographic(base, &params)?,
            });
        }
    }
    Ok(out)
}

/// An exact nonnegative ratio of two scaled totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The ratio cut (not rounded) to `decimals` places, as text.
    pub fn truncated(self, decimals: u32) -> String {
        let unit = pow10(decimals);
        let v = self.num * unit / self.den;
        crate::amount::format_scaled(v, decimals)
    }
}

/// Supply/demand ratio `Σs / Σd` and fixed-cost/capacity ratio `Σf / Σs`.
pub fn compute_sdr_ccr(instance: &Instance) -> Result<(Ratio, Ratio)> {
    let supply = instance.total_capacity() as i128;
    let demand = instance.total_demand() as i128;
    if supply <= 0 || demand <= 0 {
        return Err(Error::Structure("total supply and demand must be positive".into()));
    }
    Ok((
        Ratio { num: supply, den: demand },
        Ratio {
            num: instance.total_fixed_cost() as i128,
            den: supply,
        },
    ))
}
