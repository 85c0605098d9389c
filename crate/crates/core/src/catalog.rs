//! Named metric kinds, their parameter schemas, and the standard instances
//! exercised by the verification suites.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::log_spaced;
use crate::metric::{WarpFunction, WarpTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub constraint: &'static str,
    pub default: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KindSpec {
    pub kind: &'static str,
    pub profile: &'static str,
    pub parameters: &'static [ParamSpec],
    /// Whether the kind reads its samples from a CSV file (`path`).
    pub needs_path: bool,
}

const fn param(
    name: &'static str,
    description: &'static str,
    constraint: &'static str,
    default: Option<f64>,
) -> ParamSpec {
    ParamSpec {
        name,
        description,
        constraint,
        default,
    }
}

pub const KINDS: [KindSpec; 6] = [
    KindSpec {
        kind: "flat",
        profile: "f = s",
        parameters: &[],
        needs_path: false,
    },
    KindSpec {
        kind: "cone",
        profile: "f = a s",
        parameters: &[param("a", "cone slope", "a > 0", None)],
        needs_path: false,
    },
    KindSpec {
        kind: "power",
        profile: "f = c s^beta",
        parameters: &[
            param("c", "coefficient", "c > 0", Some(1.0)),
            param(
                "beta",
                "exponent",
                "0 < beta <= 1; beta > 1/2 for a potential",
                None,
            ),
        ],
        needs_path: false,
    },
    KindSpec {
        kind: "schwarzschild",
        profile: "areal radius r(s) of the Schwarzschild slice, s from the horizon",
        parameters: &[param("m", "mass", "m > 0", None)],
        needs_path: false,
    },
    KindSpec {
        kind: "sphere_cap_blend",
        profile: "f = sin s up to s_cap, C3 blend, then affine with the given slope",
        parameters: &[
            param("s_cap", "cap radius", "0 < s_cap < pi/2", None),
            param("blend_width", "blend length", "blend_width > 0", None),
            param("slope", "asymptotic slope", "0 < slope <= 1", Some(0.5)),
        ],
        needs_path: false,
    },
    KindSpec {
        kind: "user_table",
        profile: "quintic spline through CSV samples `s,f`, power-law tail",
        parameters: &[],
        needs_path: true,
    },
];

pub fn kind_names() -> Vec<&'static str> {
    KINDS.iter().map(|k| k.kind).collect()
}

pub fn kind_spec(kind: &str) -> Result<&'static KindSpec> {
    KINDS.iter().find(|k| k.kind == kind).ok_or_else(|| {
        Error::Usage(format!(
            "unknown metric kind `{kind}`; valid kinds: {}",
            kind_names().join(", ")
        ))
    })
}

/// A metric request: kind, scalar parameters, and for `user_table` the CSV
/// path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl MetricSpec {
    pub fn new(kind: &str, params: &[(&str, f64)]) -> Self {
        Self {
            kind: kind.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            path: None,
        }
    }

    /// The parameters with schema defaults filled in.
    pub fn resolved_params(&self) -> Result<BTreeMap<String, f64>> {
        let spec = kind_spec(&self.kind)?;
        if let Some(unknown) = self
            .params
            .keys()
            .find(|k| !spec.parameters.iter().any(|p| p.name == k.as_str()))
        {
            let valid: Vec<_> = spec.parameters.iter().map(|p| p.name).collect();
            return Err(Error::Usage(format!(
                "unknown parameter `{unknown}` for kind `{}` (expected: {})",
                self.kind,
                if valid.is_empty() {
                    "none".to_string()
                } else {
                    valid.join(", ")
                }
            )));
        }
        let mut out = BTreeMap::new();
        for p in spec.parameters {
            let value = self
                .params
                .get(p.name)
                .copied()
                .or(p.default)
                .ok_or_else(|| {
                    Error::Usage(format!(
                        "kind `{}` requires parameter `{}` ({})",
                        self.kind, p.name, p.constraint
                    ))
                })?;
            out.insert(p.name.to_string(), value);
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<WarpFunction> {
        let spec = kind_spec(&self.kind)?;
        let p = self.resolved_params()?;
        let get = |name: &str| p[name];
        match spec.kind {
            "flat" => Ok(WarpFunction::flat()),
            "cone" => WarpFunction::cone(get("a")),
            "power" => WarpFunction::power(get("c"), get("beta")),
            "schwarzschild" => WarpFunction::schwarzschild(get("m")),
            "sphere_cap_blend" => {
                WarpFunction::sphere_cap_blend(get("s_cap"), get("blend_width"), get("slope"))
            }
            "user_table" => {
                let path = self.path.as_ref().ok_or_else(|| {
                    Error::Usage("kind `user_table` requires a CSV `path`".into())
                })?;
                Ok(WarpFunction::table(WarpTable::from_csv_path(path)?))
            }
            other => unreachable!("kind `{other}` listed without a builder"),
        }
    }
}

/// A named member of the standard catalog.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub metric: WarpFunction,
}

/// Radii sampled for the tabulated entry.
const TABLE_START: f64 = 0.25;
const TABLE_END: f64 = 2000.0;
const TABLE_SAMPLES: usize = 600;

/// `power(1, 0.8)` sampled on a log grid of `[0.25, 2000]`, with the
/// missing core `s < 0.25` accounted for in the volume.
pub fn sampled_power_table() -> WarpFunction {
    let s = log_spaced(TABLE_START, TABLE_END, TABLE_SAMPLES);
    let f: Vec<f64> = s.iter().map(|x| x.powf(0.8)).collect();
    let table = WarpTable::from_samples(&s, &f).expect("valid samples");
    WarpFunction::table(table).with_core_volume(4.0 * PI * TABLE_START.powf(2.6) / 2.6)
}

/// The standard catalog: one instance per kind plus a capped cone.
pub fn standard_catalog() -> Vec<CatalogEntry> {
    let entry = |name, metric: Result<WarpFunction>| CatalogEntry {
        name,
        metric: metric.expect("catalog parameters are valid"),
    };
    vec![
        entry("flat", Ok(WarpFunction::flat())),
        entry("cone", WarpFunction::cone(0.5)),
        entry("power", WarpFunction::power(1.0, 0.8)),
        entry("schwarzschild", WarpFunction::schwarzschild(1.0)),
        entry("sphere_cap", WarpFunction::sphere_cap_blend(0.85, 0.5, 0.5)),
        entry("capped_cone", WarpFunction::sphere_cap_blend(0.1, 0.1, 0.5)),
        entry("user_table", Ok(sampled_power_table())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_kinds() {
        assert_eq!(
            kind_names(),
            [
                "flat",
                "cone",
                "power",
                "schwarzschild",
                "sphere_cap_blend",
                "user_table"
            ]
        );
    }

    #[test]
    fn unknown_kind_names_valid_kinds() {
        let err = MetricSpec::new("torus", &[]).build().unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Usage(_)));
        for k in kind_names() {
            assert!(msg.contains(k), "{msg}");
        }
    }

    #[test]
    fn defaults_and_missing_parameters() {
        let m = MetricSpec::new("power", &[("beta", 0.8)]).build().unwrap();
        assert_eq!(m.parameters(), vec![("c", 1.0), ("beta", 0.8)]);
        assert!(MetricSpec::new("cone", &[]).build().is_err());
        assert!(MetricSpec::new("cone", &[("a", 0.5), ("b", 1.0)])
            .build()
            .is_err());
        assert!(MetricSpec::new("user_table", &[]).build().is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec: MetricSpec =
            serde_json::from_str(r#"{"kind":"schwarzschild","params":{"m":2.0}}"#).unwrap();
        assert_eq!(spec.build().unwrap().kind_name(), "schwarzschild");
    }

    #[test]
    fn catalog_kinds_are_covered() {
        let cat = standard_catalog();
        for k in kind_names() {
            assert!(cat.iter().any(|e| e.metric.kind_name() == k), "{k}");
        }
    }

    #[test]
    fn sampled_table_tracks_the_power_law() {
        let m = sampled_power_table();
        for s in [0.3, 1.0, 17.0, 500.0, 5000.0] {
            let f = m.value(s).unwrap();
            assert!((f / s.powf(0.8) - 1.0).abs() < 1e-6, "s = {s}");
        }
    }
}
