//! YAML profile documents and the name-keyed profile registry.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rolescore_core::{builtin_profiles, validate, DimensionId, ProfileViolation, RoleProfile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid profile: {}", join(.0))]
    Validation(Vec<ProfileViolation>),
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
}

fn join(violations: &[ProfileViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// On-disk shape. Keys stay strings until checked so an unknown key can be
/// reported by name.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    name: String,
    #[serde(default)]
    description: String,
    weights: BTreeMap<String, i64>,
}

/// Parses a profile document without checking the publishing rules.
pub fn parse_profile(text: &str) -> Result<RoleProfile, ProfileError> {
    let doc: ProfileDoc =
        serde_yaml::from_str(text).map_err(|e| ProfileError::Parse(e.to_string()))?;
    let mut weights = BTreeMap::new();
    for (key, w) in doc.weights {
        let id: DimensionId = key
            .parse()
            .map_err(|_| ProfileError::UnknownDimension(key.clone()))?;
        let w = u32::try_from(w)
            .map_err(|_| ProfileError::Parse(format!("weight {w} for {key} is not a nonnegative integer")))?;
        weights.insert(id, w);
    }
    Ok(RoleProfile {
        name: doc.name,
        description: doc.description,
        weights,
    })
}

/// Parses and validates; only publishable profiles are returned.
pub fn load_profile(text: &str) -> Result<RoleProfile, ProfileError> {
    let profile = parse_profile(text)?;
    let violations = validate(&profile);
    if violations.is_empty() {
        Ok(profile)
    } else {
        Err(ProfileError::Validation(violations))
    }
}

#[derive(Serialize)]
struct ProfileOut<'a> {
    name: &'a str,
    description: &'a str,
    weights: &'a BTreeMap<DimensionId, u32>,
}

/// YAML document for `profile`, weights in dimension order.
pub fn serialize_profile(profile: &RoleProfile) -> String {
    serde_yaml::to_string(&ProfileOut {
        name: &profile.name,
        description: &profile.description,
        weights: &profile.weights,
    })
    .expect("profiles serialize")
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Profile { path: PathBuf, source: ProfileError },
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("profile `{0}` is already registered")]
    Duplicate(String),
}

pub fn load_profile_file(path: &Path) -> Result<RoleProfile, ProfileFileError> {
    let text = fs::read_to_string(path).map_err(|source| ProfileFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_profile(&text).map_err(|source| ProfileFileError::Profile {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    Builtin,
    File,
}

/// Profiles keyed by case-insensitive name. Starts with the five built-ins.
#[derive(Debug, Clone)]
pub struct ProfileRegistry {
    entries: Vec<(RoleProfile, ProfileSource)>,
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        ProfileRegistry {
            entries: builtin_profiles()
                .into_iter()
                .map(|p| (p, ProfileSource::Builtin))
                .collect(),
        }
    }
}

impl ProfileRegistry {
    /// Adds a profile. A name already present is rejected unless `replace`
    /// is set, in which case the new profile takes its slot.
    pub fn insert(
        &mut self,
        profile: RoleProfile,
        source: ProfileSource,
        replace: bool,
    ) -> Result<(), ProfileFileError> {
        match self.position(&profile.name) {
            Some(_) if !replace => Err(ProfileFileError::Duplicate(profile.name)),
            Some(i) => {
                self.entries[i] = (profile, source);
                Ok(())
            }
            None => {
                self.entries.push((profile, source));
                Ok(())
            }
        }
    }

    /// Registers every `*.yaml`/`*.yml` file in `dir`, in file-name order.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, ProfileFileError> {
        let entries = fs::read_dir(dir).map_err(|source| ProfileFileError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_yaml(p))
            .collect();
        files.sort();
        for f in &files {
            let profile = load_profile_file(f)?;
            self.insert(profile, ProfileSource::File, false)?;
        }
        Ok(files.len())
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|(p, _)| p.name.eq_ignore_ascii_case(name))
    }

    pub fn get(&self, name: &str) -> Option<&RoleProfile> {
        self.position(name).map(|i| &self.entries[i].0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RoleProfile, &ProfileSource)> {
        self.entries.iter().map(|(p, s)| (p, s))
    }

    pub fn builtins(&self) -> Vec<RoleProfile> {
        self.iter()
            .filter(|(_, s)| **s == ProfileSource::Builtin)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// A reference that looks like a path (has a separator or a YAML
    /// extension) loads that file; anything else is a registry name.
    pub fn resolve(&self, reference: &str) -> Result<RoleProfile, ProfileFileError> {
        let path = Path::new(reference);
        if reference.contains(std::path::MAIN_SEPARATOR) || reference.contains('/') || is_yaml(path)
        {
            return load_profile_file(path);
        }
        self.get(reference)
            .cloned()
            .ok_or_else(|| ProfileFileError::UnknownProfile(reference.to_string()))
    }
}

fn is_yaml(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e == "yaml" || e == "yml")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rolescore_core::builtin;

    #[test]
    fn builtins_round_trip() {
        for p in builtin_profiles() {
            let text = serialize_profile(&p);
            assert_eq!(load_profile(&text).unwrap(), p);
        }
    }

    #[test]
    fn researcher_document() {
        let text = "name: researcher\ndescription: r\nweights:\n  D1: 8\n  D2: 6\n  D6: 12\n  D7: 10\n  D8: 3\n  D9: 7\n  D10: 5\n  D11: 4\n  D14: 10\n  D15: 2\n  D16: 7\n  D17: 2\n  D35: 4\n";
        let p = load_profile(text).unwrap();
        assert_eq!(p.weights, builtin("researcher").unwrap().weights);
        assert_eq!(p.total_weight(), 80);
    }

    #[test]
    fn document_errors() {
        assert_eq!(
            parse_profile("name: x\nweights:\n  D36: 80\n").unwrap_err(),
            ProfileError::UnknownDimension("D36".into())
        );
        assert!(matches!(
            parse_profile("name: x\nweights: [1, 2]\n"),
            Err(ProfileError::Parse(_))
        ));
        assert!(matches!(
            parse_profile("name: x\nweights:\n  D1: -3\n"),
            Err(ProfileError::Parse(_))
        ));
        assert!(matches!(
            parse_profile("name: x\nwieghts:\n  D1: 3\n"),
            Err(ProfileError::Parse(_))
        ));

        let mut ciso = builtin("ciso").unwrap();
        *ciso.weights.get_mut(&DimensionId::D1).unwrap() = 9;
        let err = load_profile(&serialize_profile(&ciso)).unwrap_err();
        assert_eq!(err.to_string(), "invalid profile: sum 79 ≠ 80");
    }

    #[test]
    fn registry_names_are_case_insensitive() {
        let mut reg = ProfileRegistry::default();
        assert_eq!(reg.get("CISO").unwrap().name, "ciso");
        let mut shadow = builtin("caio").unwrap();
        shadow.name = "CISO".into();
        assert!(matches!(
            reg.insert(shadow.clone(), ProfileSource::File, false),
            Err(ProfileFileError::Duplicate(_))
        ));
        reg.insert(shadow, ProfileSource::File, true).unwrap();
        assert_eq!(reg.get("ciso").unwrap().name, "CISO");
        assert_eq!(reg.iter().count(), 5);
        assert!(matches!(
            reg.resolve("nobody"),
            Err(ProfileFileError::UnknownProfile(_))
        ));
    }
}
