//! Tour of the model gallery: what each entry is made of, which analytic
//! targets it carries, and two structural identities — the symmetric
//! model's auxiliary kernel equals its base kernel, and the lattice walk's
//! kernel ignores the time environment.
//!
//! ```bash
//! cargo run --release --example gallery_tour
//! ```

use branchlab::gallery::{make_example, GALLERY_NAMES};
use branchlab::kernels::{build_aux_kernel, TraitModel};

fn main() -> branchlab::Result<()> {
    for name in GALLERY_NAMES {
        let entry = make_example(name, &serde_json::Value::Null)?;
        let kind = match &entry.model {
            TraitModel::SymmetricIndependent { .. } => "symmetric independent kernel",
            TraitModel::FiniteStateJoint { .. } => "per-state, per-child-slot kernels",
            TraitModel::IidIncrements { .. } => "i.i.d. increments per time environment",
            TraitModel::LocationRwre { .. } => "nearest-neighbour walk, environment in locations",
        };
        let states = entry.env_spec.states();
        let means: Vec<String> = states.iter().map(|s| format!("{:.2}", s.mean())).collect();
        println!("{name}: {kind}");
        println!(
            "  {} environment state(s), offspring means [{}], alphabet {}",
            states.len(),
            means.join(", "),
            entry
                .model
                .alphabet()
                .map_or("numeric".into(), |d| d.to_string())
        );
        if let Some(pi) = &entry.targets.stationary {
            let p: Vec<String> = pi.iter().map(|x| format!("{x:.6}")).collect();
            println!("  auxiliary chain is homogeneous; fixed point [{}]", p.join(", "));
        }
        if entry.targets.clt.is_some() {
            println!("  carries a CLT normalizer recipe");
        }
    }

    println!();
    let sym = make_example("ex3_2", &serde_json::Value::Null)?;
    if let TraitModel::SymmetricIndependent { base } = &sym.model {
        let worst = sym
            .env_spec
            .states()
            .iter()
            .map(|s| {
                build_aux_kernel(s, &sym.model)
                    .unwrap()
                    .exact()
                    .unwrap()
                    .max_abs_diff(base)
            })
            .fold(0.0, f64::max);
        println!("ex3_2 identity: max |Q - p| over states = {worst:.3e} (expected 0)");
    }

    let walk = make_example("ex3_6", &serde_json::Value::Null)?;
    let other_time_env = make_example(
        "ex3_6",
        &serde_json::json!({"pmfs": [[0.0, 0.5, 0.5], [0.0, 0.2, 0.8]]}),
    )?;
    let k1 = build_aux_kernel(&walk.env_spec.states()[0], &walk.model)?;
    let k2 = build_aux_kernel(&other_time_env.env_spec.states()[1], &other_time_env.model)?;
    println!(
        "ex3_6 kernel depends only on the location environment: {}",
        if k1.same_law(&k2) { "confirmed" } else { "VIOLATED" }
    );
    Ok(())
}
