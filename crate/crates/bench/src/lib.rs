//! Fixtures shared by the criterion benchmarks in `benches/`.

use featbench_cli::synthetic::{Scene, SyntheticSpec, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use featbench_core::Image;

/// A synthetic template view and the same point seen at +15 degrees yaw,
/// both at the default dataset size.
pub fn view_pair() -> (Image, Image) {
    let spec = SyntheticSpec::default();
    let scene = Scene::render(0, &spec);
    (
        scene.view(DEFAULT_WIDTH, DEFAULT_HEIGHT, 1, 0),
        scene.view(DEFAULT_WIDTH, DEFAULT_HEIGHT, 1, 15),
    )
}
