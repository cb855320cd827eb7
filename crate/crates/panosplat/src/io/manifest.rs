//! JSON scene manifest: view file paths, canvas size, pipeline parameters.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::IoError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneManifest {
    pub views: Vec<ViewPaths>,
    pub canvas: CanvasSize,
    #[serde(default)]
    pub params: PipelineParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViewPaths {
    pub image_path: String,
    pub points_path: String,
    pub pose_path: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CanvasSize {
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineParams {
    /// Confidence threshold for valid pixels.
    #[serde(default = "default_tau_c")]
    pub tau_c: f64,
    /// Robust down-weighting function applied to local geometric variation.
    #[serde(default)]
    pub rho_kind: RhoKind,
    /// Scale for the exponential robust function: "auto" = per-view median.
    #[serde(default)]
    pub rho_sigma: SigmaParam,
    /// Splat kernel width in canvas pixels.
    #[serde(default = "default_kernel_sigma")]
    pub kernel_sigma: f64,
    /// Splat kernel truncation radius in pixels.
    #[serde(default = "default_kernel_radius")]
    pub kernel_radius: usize,
    /// Hole threshold on the accumulation field.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Normalization stabilizer for splatting.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub fill_method: FillMethod,
}

fn default_tau_c() -> f64 {
    0.5
}
fn default_kernel_sigma() -> f64 {
    0.8
}
fn default_kernel_radius() -> usize {
    2
}
fn default_tau() -> f64 {
    1e-3
}
fn default_epsilon() -> f64 {
    1e-8
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            tau_c: default_tau_c(),
            rho_kind: RhoKind::default(),
            rho_sigma: SigmaParam::default(),
            kernel_sigma: default_kernel_sigma(),
            kernel_radius: default_kernel_radius(),
            tau: default_tau(),
            epsilon: default_epsilon(),
            fill_method: FillMethod::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoKind {
    #[default]
    Exp,
    Reciprocal,
}

/// `"auto"` or a positive number.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum SigmaParam {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for SigmaParam {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SigmaParam::Auto => s.serialize_str("auto"),
            SigmaParam::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for SigmaParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(SigmaParam::Fixed(v)),
            Raw::Text(s) if s == "auto" => Ok(SigmaParam::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "rho_sigma must be \"auto\" or a number, found {s:?}"
            ))),
        }
    }
}

/// Hole completion selector for the stitch pipeline.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum FillMethod {
    #[default]
    Diffusion,
    PullPush,
    None,
    /// Shell command run in a working directory holding `input.ppm` and
    /// `mask.pgm`; must produce `output.ppm` there.
    External(String),
}

impl FromStr for FillMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diffusion" => Ok(FillMethod::Diffusion),
            "pullpush" => Ok(FillMethod::PullPush),
            "none" => Ok(FillMethod::None),
            _ => match s.strip_prefix("external:") {
                Some(cmd) if !cmd.is_empty() => Ok(FillMethod::External(cmd.to_string())),
                _ => Err(format!(
                    "unknown fill method {s:?} (expected diffusion|pullpush|none|external:<cmd>)"
                )),
            },
        }
    }
}

impl fmt::Display for FillMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FillMethod::Diffusion => write!(f, "diffusion"),
            FillMethod::PullPush => write!(f, "pullpush"),
            FillMethod::None => write!(f, "none"),
            FillMethod::External(cmd) => write!(f, "external:{cmd}"),
        }
    }
}

impl Serialize for FillMethod {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FillMethod {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl SceneManifest {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path)?;
        let manifest: SceneManifest =
            serde_json::from_str(&text).map_err(|e| IoError::ParseError {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        self.validate()?;
        let text = serde_json::to_string_pretty(self).expect("manifest serialization");
        fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let fail = |msg: String| Err(IoError::InvalidManifest(msg));
        if self.views.is_empty() {
            return fail("no views".into());
        }
        if self.canvas.width < 2 || self.canvas.height < 2 {
            return fail(format!(
                "canvas must be at least 2x2, got {}x{}",
                self.canvas.width, self.canvas.height
            ));
        }
        let p = &self.params;
        if !(0.0..=1.0).contains(&p.tau_c) {
            return fail(format!("tau_c must be in [0, 1], got {}", p.tau_c));
        }
        // Negated comparisons below so NaN fails validation too.
        if !(p.tau > 0.0) {
            return fail(format!("tau must be > 0, got {}", p.tau));
        }
        if !(p.epsilon > 0.0) {
            return fail(format!("epsilon must be > 0, got {}", p.epsilon));
        }
        if !(p.kernel_sigma > 0.0) {
            return fail(format!("kernel_sigma must be > 0, got {}", p.kernel_sigma));
        }
        if let SigmaParam::Fixed(v) = p.rho_sigma {
            if !(v > 0.0) {
                return fail(format!("rho_sigma must be > 0, got {v}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "views": [
                {"image_path": "v.ppm", "points_path": "v.lpm", "pose_path": "v.pose"}
            ],
            "canvas": {"width": 64, "height": 32}
        }"#
        .to_string()
    }

    fn parse(json: &str) -> Result<SceneManifest, IoError> {
        let m: SceneManifest = serde_json::from_str(json).map_err(|e| IoError::ParseError {
            path: "inline".into(),
            reason: e.to_string(),
        })?;
        m.validate()?;
        Ok(m)
    }

    #[test]
    fn defaults_applied() {
        let m = parse(&minimal_json()).unwrap();
        assert_eq!(m.params.tau_c, 0.5);
        assert_eq!(m.params.rho_kind, RhoKind::Exp);
        assert_eq!(m.params.rho_sigma, SigmaParam::Auto);
        assert_eq!(m.params.kernel_sigma, 0.8);
        assert_eq!(m.params.kernel_radius, 2);
        assert_eq!(m.params.tau, 1e-3);
        assert_eq!(m.params.fill_method, FillMethod::Diffusion);
    }

    #[test]
    fn zero_views_rejected() {
        let json = minimal_json().replace(
            r#"{"image_path": "v.ppm", "points_path": "v.lpm", "pose_path": "v.pose"}"#,
            "",
        );
        assert!(matches!(parse(&json), Err(IoError::InvalidManifest(_))));
    }

    #[test]
    fn out_of_range_tau_c_rejected() {
        let json = minimal_json().replace(
            r#""canvas": {"width": 64, "height": 32}"#,
            r#""canvas": {"width": 64, "height": 32}, "params": {"tau_c": 1.2}"#,
        );
        assert!(matches!(parse(&json), Err(IoError::InvalidManifest(_))));
    }

    #[test]
    fn sigma_param_forms() {
        let json = minimal_json().replace(
            r#""canvas": {"width": 64, "height": 32}"#,
            r#""canvas": {"width": 64, "height": 32}, "params": {"rho_sigma": 0.25}"#,
        );
        assert_eq!(
            parse(&json).unwrap().params.rho_sigma,
            SigmaParam::Fixed(0.25)
        );
        let json = minimal_json().replace(
            r#""canvas": {"width": 64, "height": 32}"#,
            r#""canvas": {"width": 64, "height": 32}, "params": {"rho_sigma": "auto"}"#,
        );
        assert_eq!(parse(&json).unwrap().params.rho_sigma, SigmaParam::Auto);
    }

    #[test]
    fn fill_method_parsing() {
        assert_eq!(
            "diffusion".parse::<FillMethod>().unwrap(),
            FillMethod::Diffusion
        );
        assert_eq!(
            "pullpush".parse::<FillMethod>().unwrap(),
            FillMethod::PullPush
        );
        assert_eq!("none".parse::<FillMethod>().unwrap(), FillMethod::None);
        assert_eq!(
            "external:cp input.ppm output.ppm"
                .parse::<FillMethod>()
                .unwrap(),
            FillMethod::External("cp input.ppm output.ppm".into())
        );
        assert!("bilinear".parse::<FillMethod>().is_err());
    }
}
