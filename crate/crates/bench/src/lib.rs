//! Benchmark fixtures: named resources paired with the model they are
//! scored against.

use losr_core::resource::{singlet_assemblage, singlet_resource, tsirelson_box};
use losr_core::{auto_free_model, hierarchy_free_model, ChoiResource, FreeSetModel};

pub struct Fixture {
    pub name: &'static str,
    pub resource: ChoiResource,
    pub model: FreeSetModel,
}

fn exact(name: &'static str, resource: ChoiResource) -> Fixture {
    let model = auto_free_model(resource.spec(), None).expect("exact model");
    Fixture { name, resource, model }
}

/// Exact-model fixtures: an LP, two SDPs with a classical party and a PPT
/// SDP.
pub fn exact_fixtures() -> Vec<Fixture> {
    vec![
        exact("tsirelson_lp", tsirelson_box()),
        exact("xz_assemblage_sdp", singlet_assemblage(false)),
        exact("xzy_assemblage_sdp", singlet_assemblage(true)),
        exact("singlet_ppt", singlet_resource()),
    ]
}

/// Singlet against extension models of increasing level.
pub fn hierarchy_fixtures(max_level: usize) -> Vec<(usize, Fixture)> {
    (1..=max_level)
        .map(|n| {
            let resource = singlet_resource();
            let model = hierarchy_free_model(resource.spec(), n).expect("small extension");
            (n, Fixture { name: "singlet_extension", resource, model })
        })
        .collect()
}
