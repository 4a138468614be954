//! Closed-form invariants: Riemann–Roch indices, Chern coefficients of the
//! index bundle over the Picard torus, and genus-0 cohomotopy group orders.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Indices of the linearized vortex map for degree `d` on genus `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexData {
    pub d: i64,
    pub g: u32,
    /// `d + 1 − g`, the index of `∂̄` on a degree-`d` bundle.
    pub complex_index: i64,
    /// `2·complex_index − 1`, adding the real 1-form block of index `−1`.
    pub real_index: i64,
}

pub fn riemann_roch(d: i64, g: u32) -> IndexData {
    let complex_index = d + 1 - g as i64;
    IndexData {
        d,
        g,
        complex_index,
        real_index: 2 * complex_index - 1,
    }
}

/// Coefficient of `θ^k` in `c_k` of the index bundle: `(−1)^k / k!`.
pub fn chern_coefficient(k: u32) -> BigRational {
    let factorial = (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    BigRational::new(sign, factorial)
}

/// Order of the genus-0 group for degree `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum GroupOrder {
    Known(u64),
    /// Finite, but not determined by the available tables.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genus0Order {
    pub d: i64,
    pub order: GroupOrder,
    pub finite: bool,
}

/// Orders of the stable cohomotopy groups `[CP^d, S⁰]` relevant to genus 0:
/// trivial for `d < 0` and `d ∈ {0, 2}`, order 2 for `d = 1`.
pub fn genus0_group_order(d: i64) -> Genus0Order {
    let order = match d {
        d if d < 0 => GroupOrder::Known(1),
        0 | 2 => GroupOrder::Known(1),
        1 => GroupOrder::Known(2),
        _ => GroupOrder::Unknown,
    };
    Genus0Order {
        d,
        order,
        finite: true,
    }
}

/// Comparison of `τ₀` with `τ`, as used by [`moduli_dimension`].
pub use crate::verify::TauRelation;

/// Real dimension of the vortex moduli space; `−1` marks the empty set.
pub fn moduli_dimension(d: i64, g: u32, relation: TauRelation) -> i64 {
    match relation {
        TauRelation::Below => 2 * d,
        TauRelation::Critical => 2 * g as i64,
        TauRelation::Above => -1,
    }
}

/// Render a rational as `p/q` (or `p` when integral).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() || r.numer().is_zero() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
