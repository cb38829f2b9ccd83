//! Synthetic replacement for the physical sensor rig: procedural objects, a
//! ray-cast depth camera with a controllable occlusion dial, fingertip contact
//! patches, and complete grasp scenes that can be saved and reloaded.

mod presets;
mod raycast;
mod scene;
mod shapes;
mod store;
mod tactile;
mod vision;

pub use presets::{benchmark_suite, generate_suite, insertion_angles, preset, SuiteConfig, PRESET_NAMES};
pub use scene::{
    generate_scene, random_rotation, ContactPlacement, GraspScene, PoseSampler, SceneMetadata, SceneSpec,
    TactileConfig,
};
pub use shapes::{generate_shape, min_extent, ShapeSpec};
pub use store::{load_scene, load_scenes, save_scene, SceneManifest, MANIFEST_FILE};
pub use tactile::{antipodal_contacts, sample_tactile, TactileSpec, CONTACT_TOLERANCE};
pub use vision::{render_vision, CameraSpec, PosedSurface, VisibleSurface};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random stream `stream` of the generator seeded with `seed`.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
