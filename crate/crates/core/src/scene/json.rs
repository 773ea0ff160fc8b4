//! Hand-editable JSON scene format.
//!
//! ```json
//! { "sh_degree": 0,
//!   "gaussians": [ { "center": [0, 0, 0], "scale": [0.1, 0.1, 0.1],
//!                    "rotation": [1, 0, 0, 0], "opacity": 0.8,
//!                    "sh": [[0.5, 0.2, 0.1]] } ] }
//! ```
//!
//! Opacity and scale are stored as activated values, not logits or logs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Gaussian3D, Scene};
use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Serialize, Deserialize)]
pub struct SceneFile {
    pub sh_degree: u8,
    pub gaussians: Vec<GaussianRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GaussianRecord {
    pub center: [f64; 3],
    pub scale: [f64; 3],
    pub rotation: [f64; 4],
    pub opacity: f64,
    pub sh: Vec<[f64; 3]>,
}

impl<T: Real> From<&Scene<T>> for SceneFile {
    fn from(scene: &Scene<T>) -> Self {
        let f = |v: T| v.as_f64();
        SceneFile {
            sh_degree: scene.sh_degree,
            gaussians: scene
                .gaussians
                .iter()
                .map(|g| GaussianRecord {
                    center: g.center.map(f),
                    scale: g.scale.map(f),
                    rotation: g.rotation.map(f),
                    opacity: f(g.opacity),
                    sh: g.sh.iter().map(|c| c.map(f)).collect(),
                })
                .collect(),
        }
    }
}

impl SceneFile {
    pub fn into_scene<T: Real>(self) -> Result<Scene<T>> {
        let gaussians = self
            .gaussians
            .into_iter()
            .map(|r| Gaussian3D {
                center: r.center.map(T::lit),
                scale: r.scale.map(T::lit),
                rotation: r.rotation.map(T::lit),
                opacity: T::lit(r.opacity),
                sh: r.sh.into_iter().map(|c| c.map(T::lit)).collect(),
            })
            .collect();
        Scene::new(gaussians, self.sh_degree)
    }
}

pub fn load_json<T: Real>(path: &Path) -> Result<Scene<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_json(&text)
}

pub fn parse_json<T: Real>(text: &str) -> Result<Scene<T>> {
    let file: SceneFile = serde_json::from_str(text)?;
    file.into_scene()
}

pub fn write_json<T: Real>(scene: &Scene<T>, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&SceneFile::from(scene))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_fixture() {
        let text = r#"{"sh_degree":0,"gaussians":[
            {"center":[0,0,1],"scale":[0.1,0.2,0.3],"rotation":[2,0,0,0],
             "opacity":0.75,"sh":[[0.1,0.2,0.3]]}]}"#;
        let scene: Scene<f64> = parse_json(text).unwrap();
        assert_eq!(scene.len(), 1);
        assert_eq!(scene.gaussians[0].rotation, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(scene.gaussians[0].opacity, 0.75);
    }

    #[test]
    fn missing_field_is_an_error() {
        let text = r#"{"sh_degree":0,"gaussians":[{"center":[0,0,1]}]}"#;
        assert!(parse_json::<f32>(text).is_err());
    }
}
