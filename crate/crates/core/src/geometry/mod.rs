//! Bounded monomials, prepared functions, cells and scene files.

mod cell;
mod monomial;
mod prepared;
mod scene;

pub use cell::{Cell, Wall};
pub use monomial::BoundedMonomial;
pub use prepared::{c1_norm_check, C1Report, PreparedBoundConstants, PreparedFunction, UNIT_MARGIN};
pub use scene::{
    validate_function, BoundSpec, CellSpec, Fiber, FunctionSpec, MonomialSpec, Scene, SceneFunction, WallSpec,
};

/// Scenes shipped with the library, addressable as `builtin:<name>`.
pub mod fixtures {
    use super::Scene;
    use crate::error::{Error, Result};

    pub const CUSP_JSON: &str = include_str!("../../fixtures/cusp.json");
    pub const HYPERBOLA_JSON: &str = include_str!("../../fixtures/hyperbola.json");

    pub const NAMES: [&str; 2] = ["cusp", "hyperbola"];

    /// x1³/x2 on {x1^{3/2} < x2 < 1}.
    pub fn cusp() -> Scene {
        Scene::from_json(CUSP_JSON).expect("bundled cusp scene parses")
    }

    /// t/x on (√t, 1); by the symmetry x ↔ t/x this is half of {xy = t}.
    pub fn hyperbola() -> Scene {
        Scene::from_json(HYPERBOLA_JSON).expect("bundled hyperbola scene parses")
    }

    pub fn by_name(name: &str) -> Result<Scene> {
        match name {
            "cusp" => Ok(cusp()),
            "hyperbola" => Ok(hyperbola()),
            _ => Err(Error::Parse(format!("unknown builtin scene {name:?} (have {NAMES:?})"))),
        }
    }
}
