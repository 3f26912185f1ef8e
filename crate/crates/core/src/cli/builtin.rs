/// Bundled experiment configurations, by name.
pub const BUILTINS: &[(&str, &str)] = &[
    ("robin-loop", include_str!("../../configs/robin_loop.toml")),
    (
        "dislocation-edge",
        include_str!("../../configs/dislocation_edge.toml"),
    ),
    ("junction", include_str!("../../configs/junction.toml")),
    ("tube-edge", include_str!("../../configs/tube_edge.toml")),
    (
        "tube-junction",
        include_str!("../../configs/tube_junction.toml"),
    ),
    (
        "scalar-winding",
        include_str!("../../configs/scalar_winding.toml"),
    ),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}
