//! Bundled configurations for the two-nucleus model and the tail law.

const PRESETS: &[(&str, &str)] = &[
    ("fig1_z2", include_str!("../presets/fig1_z2.toml")),
    ("fig1_z3", include_str!("../presets/fig1_z3.toml")),
    ("fig2_z2", include_str!("../presets/fig2_z2.toml")),
    ("fig2_z3", include_str!("../presets/fig2_z3.toml")),
    ("fig3_z2", include_str!("../presets/fig3_z2.toml")),
    ("fig3_z3", include_str!("../presets/fig3_z3.toml")),
    ("tail_law_z2", include_str!("../presets/tail_law_z2.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
