//! Closed-form tables: Riemann–Roch indices, Chern coefficients of the index
//! bundle and genus-0 group orders.
//!
//!     cargo run --example topology_tables

use vortex_lattice::topology::{
    chern_coefficient, format_rational, genus0_group_order, moduli_dimension, riemann_roch, GroupOrder, TauRelation,
};

fn main() {
    println!("d   g=0  g=1  g=2   (complex index d+1−g)");
    for d in -2..=4i64 {
        let row: Vec<String> = (0..3).map(|g| format!("{:>4}", riemann_roch(d, g).complex_index)).collect();
        println!("{d:>2} {}", row.join(" "));
    }
    for k in 0..=5 {
        println!("coefficient of θ^{k}: {}", format_rational(&chern_coefficient(k)));
    }
    for d in -1..=4 {
        let o = genus0_group_order(d);
        match o.order {
            GroupOrder::Known(v) => println!("genus 0, d={d}: order {v}"),
            GroupOrder::Unknown => println!("genus 0, d={d}: finite, order not tabulated"),
        }
    }
    for rel in [TauRelation::Below, TauRelation::Critical, TauRelation::Above] {
        println!("real moduli dimension for d=2, g=1, {rel:?}: {}", moduli_dimension(2, 1, rel));
    }
}
