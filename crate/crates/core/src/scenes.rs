//! Synthetic floorplans bundled with the library.

use crate::config::{PlanConfig, Profile};
use crate::error::{Error, Result};
use crate::floorplan::{parse_floorplan, Floorplan};

#[derive(Debug, Clone, Copy)]
pub struct Scene {
    pub name: &'static str,
    pub json: &'static str,
    pub profile: Profile,
    /// Grid resolution used for full planning runs, when it differs from the profile default.
    pub resolution: Option<f64>,
}

impl Scene {
    pub fn floorplan(&self) -> Floorplan {
        parse_floorplan(self.json.as_bytes()).expect("bundled scenes are valid")
    }

    pub fn config(&self) -> PlanConfig {
        let mut cfg = PlanConfig::for_profile(self.profile);
        if let Some(r) = self.resolution {
            cfg.resolution = r;
        }
        cfg
    }
}

const fn scene(name: &'static str, json: &'static str, profile: Profile, resolution: Option<f64>) -> Scene {
    Scene {
        name,
        json,
        profile,
        resolution,
    }
}

/// 10 x 10 m square room.
pub const SQUARE: Scene = scene("square", include_str!("../scenes/square.json"), Profile::Indoor, None);
/// 12 x 12 m L-shaped room with 7 m arms.
pub const LSHAPE: Scene = scene("lshape", include_str!("../scenes/lshape.json"), Profile::Indoor, None);
/// Two 8 x 8 m rooms joined by a 2 m door in a thin wall.
pub const TWO_ROOM: Scene = scene("two_room", include_str!("../scenes/two_room.json"), Profile::Indoor, None);
/// 20 x 20 m hall around a 6 x 6 m core.
pub const ANNULUS: Scene = scene("annulus", include_str!("../scenes/annulus.json"), Profile::Indoor, None);
/// 60 x 3 m corridor.
pub const CORRIDOR: Scene = scene("corridor", include_str!("../scenes/corridor.json"), Profile::Indoor, None);
/// 24 x 12 m, six 8 x 6 m rooms with 2 m doors.
pub const MULTI_ROOM: Scene = scene("multi_room", include_str!("../scenes/multi_room.json"), Profile::Indoor, None);
/// 160 x 124 m site with twelve 20 x 20 m buildings and 16 m streets.
pub const OPEN_SITE: Scene = scene("open_site", include_str!("../scenes/open_site.json"), Profile::Outdoor, None);
/// 60 x 40 m, twenty 12 x 10 m rooms with 2 m doors.
pub const GRID20: Scene = scene("grid20", include_str!("../scenes/grid20.json"), Profile::Indoor, Some(0.05));

pub const ALL: [Scene; 8] = [SQUARE, LSHAPE, TWO_ROOM, ANNULUS, CORRIDOR, MULTI_ROOM, OPEN_SITE, GRID20];

pub fn by_name(name: &str) -> Result<Scene> {
    ALL.iter()
        .find(|s| s.name == name)
        .copied()
        .ok_or_else(|| Error::Parameter(format!("unknown scene {name:?}")))
}
