//! Low-rank SDP relaxation of `max zᵀAz` and `s`-linear rounding.
//!
//! The relaxation replaces `z_i ∈ {±1}` by unit vectors `u_i` and maximizes
//! `Σ_ij a_ij ⟨u_i, u_j⟩` by block coordinate ascent. Rounding projects on a
//! Gaussian direction `Z` and sets `z_i = +1` with probability
//! `1/2 + φ_ρ(⟨u_i, Z⟩)/2`, where `φ_ρ` clamps `y/ρ` to `[−1, 1]`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::instances::{IqpInstance, RandomTape};

pub fn default_rank(n: usize) -> usize {
    ((2.0 * n as f64).sqrt().ceil() as usize) + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vectors: Vec<Vec<f64>>,
    /// `Σ_ij a_ij ⟨u_i, u_j⟩` at the end of the run.
    pub objective: f64,
    /// Objective after initialization and after every sweep.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|c| *c /= norm);
    }
    norm
}

pub fn sdp_objective(q: &IqpInstance, vectors: &[Vec<f64>]) -> f64 {
    let n = q.n();
    let mut total = 0.0;
    for i in 0..n {
        total += q.a(i, i) * dot(&vectors[i], &vectors[i]);
        for j in i + 1..n {
            total += 2.0 * q.a(i, j) * dot(&vectors[i], &vectors[j]);
        }
    }
    total
}

pub fn sdp_embed(q: &IqpInstance, rank: usize, sweeps: usize, tape: &RandomTape) -> Result<Embedding> {
    if rank < 2 {
        return domain(format!("rank {rank} must be at least 2"));
    }
    if sweeps == 0 {
        return domain("at least one sweep is required");
    }
    let n = q.n();
    let mut vectors: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut rng = tape.rng(i as u64);
            loop {
                let mut v: Vec<f64> = (0..rank).map(|_| rng.sample(StandardNormal)).collect();
                if normalize(&mut v) > 0.0 {
                    break v;
                }
            }
        })
        .collect();
    let mut history = vec![sdp_objective(q, &vectors)];
    let mut g = vec![0.0; rank];
    for _ in 0..sweeps {
        for i in 0..n {
            g.iter_mut().for_each(|c| *c = 0.0);
            for j in (0..n).filter(|&j| j != i) {
                let a = q.a(i, j);
                if a != 0.0 {
                    g.iter_mut().zip(&vectors[j]).for_each(|(c, u)| *c += a * u);
                }
            }
            if dot(&g, &g).sqrt() <= 1e-300 {
                continue;
            }
            normalize(&mut g);
            // Only accept strict improvements so the objective never drops
            // through rounding noise.
            if dot(&g, &vectors[i]) < 1.0 {
                let before: f64 = (0..n).filter(|&j| j != i).map(|j| q.a(i, j) * dot(&vectors[i], &vectors[j])).sum();
                let after: f64 = (0..n).filter(|&j| j != i).map(|j| q.a(i, j) * dot(&g, &vectors[j])).sum();
                if after > before {
                    vectors[i].copy_from_slice(&g);
                }
            }
        }
        history.push(sdp_objective(q, &vectors));
    }
    let objective = *history.last().expect("history is never empty");
    Ok(Embedding { vectors, objective, history })
}

/// `φ_ρ(y)`: `y/ρ` clamped to `[−1, 1]`; `ρ = 0` is the sign function.
pub fn phi(rho: f64, y: f64) -> f64 {
    if rho == 0.0 {
        if y > 0.0 {
            1.0
        } else if y < 0.0 {
            -1.0
        } else {
            0.0
        }
    } else {
        (y / rho).clamp(-1.0, 1.0)
    }
}

/// Projections `⟨u_i, Z⟩` on a standard Gaussian `Z` read from substream 0.
pub fn gaussian_projections(e: &Embedding, tape: &RandomTape) -> Vec<f64> {
    let rank = e.vectors.first().map_or(0, Vec::len);
    let mut rng = tape.rng(0);
    let z: Vec<f64> = (0..rank).map(|_| rng.sample(StandardNormal)).collect();
    e.vectors.iter().map(|u| dot(u, &z)).collect()
}

/// Per-vertex uniforms deciding the coin flips, read from substream 1.
pub fn rounding_uniforms(n: usize, tape: &RandomTape) -> Vec<f64> {
    let mut rng = tape.rng(1);
    (0..n).map(|_| rng.random()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rounding {
    pub z: Vec<i8>,
    /// `zᵀAz`.
    pub realized: f64,
    /// Expected `zᵀAz` over the coin flips with `Z` held fixed.
    pub expected_given_z: f64,
    pub projections: Vec<f64>,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return domain(format!("rounding parameter {rho} must be finite and non-negative"));
    }
    Ok(())
}

/// `Σ_i a_ii + Σ_{i≠j} a_ij φ_ρ(v_i) φ_ρ(v_j)`.
pub fn expected_value(q: &IqpInstance, projections: &[f64], rho: f64) -> f64 {
    let n = q.n();
    let p: Vec<f64> = projections.iter().map(|&v| phi(rho, v)).collect();
    let mut total = 0.0;
    for i in 0..n {
        total += q.a(i, i);
        for j in i + 1..n {
            total += 2.0 * q.a(i, j) * p[i] * p[j];
        }
    }
    total
}

/// Rounds with explicit projections and coin uniforms.
pub fn round_projections(q: &IqpInstance, projections: &[f64], rho: f64, uniforms: &[f64]) -> Result<Rounding> {
    check_rho(rho)?;
    if projections.len() != q.n() || uniforms.len() != q.n() {
        return domain("projection and uniform counts must equal the instance size");
    }
    let z: Vec<i8> = projections
        .iter()
        .zip(uniforms)
        .map(|(&v, &u)| if u < 0.5 + phi(rho, v) / 2.0 { 1 } else { -1 })
        .collect();
    Ok(Rounding {
        realized: q.quadratic_form(&z),
        expected_given_z: expected_value(q, projections, rho),
        z,
        projections: projections.to_vec(),
    })
}

pub fn slinear_round(e: &Embedding, q: &IqpInstance, rho: f64, tape: &RandomTape) -> Result<Rounding> {
    if e.vectors.len() != q.n() {
        return domain(format!("embedding has {} vectors, instance {} variables", e.vectors.len(), q.n()));
    }
    let v = gaussian_projections(e, tape);
    round_projections(q, &v, rho, &rounding_uniforms(q.n(), tape))
}

/// Parameters where some coin outcome flips for fixed projections and
/// uniforms. Between consecutive values the rounded vector is constant.
pub fn slinear_critical_values(projections: &[f64], uniforms: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = projections
        .iter()
        .zip(uniforms)
        .filter_map(|(&v, &u)| {
            let t = 2.0 * u - 1.0;
            // z = +1 iff t < φ_ρ(v); with φ_ρ(v) = v/ρ inside the clamp this
            // flips at ρ = v/t when v and t share a sign.
            if v != 0.0 && t != 0.0 && (v > 0.0) == (t > 0.0) {
                Some(v / t)
            } else {
                None
            }
        })
        .filter(|c| c.is_finite() && *c > 0.0)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
