//! Dataset manifests for folder-per-class and image-plus-mask layouts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{derive_label, GROUND_TRUTH_THRESHOLD};
use crate::error::{Error, Result};
use crate::imaging::load_mask;
use crate::FloodLabel;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetLayout {
    /// `root/<class>/*.png`; class folder names map to labels.
    FolderPerClass,
    /// `root/images/<stem>.*` paired with `root/masks/<stem>.*` (or
    /// `<stem>_lab.*`, the naming used by some segmentation releases).
    ImagePlusMask,
}

impl std::str::FromStr for DatasetLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "folder-per-class" | "folders" => Ok(DatasetLayout::FolderPerClass),
            "image-plus-mask" | "masks" => Ok(DatasetLayout::ImagePlusMask),
            other => Err(Error::InvalidParameter(format!("unknown dataset layout {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundTruth {
    Label(FloodLabel),
    Mask(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub name: String,
    pub layout: DatasetLayout,
    pub entries: Vec<ManifestEntry>,
    pub water_class_values: Vec<u8>,
}

/// Subfolder names used by the folder-per-class layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFolders {
    pub flooded: String,
    pub normal: String,
}

impl Default for ClassFolders {
    fn default() -> Self {
        Self {
            flooded: "flooded".into(),
            normal: "normal".into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<FloodLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    name: String,
    layout: DatasetLayout,
    entries: Vec<EntryFile>,
    #[serde(default)]
    water_class_values: Vec<u8>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_image(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

impl DatasetManifest {
    /// Resolves the label of `entry`, reading its mask when needed.
    pub fn truth_of(&self, entry: &ManifestEntry) -> Result<FloodLabel> {
        match &entry.truth {
            GroundTruth::Label(l) => Ok(*l),
            GroundTruth::Mask(path) => {
                let mask = load_mask(path)?;
                Ok(derive_label(mask.data(), &self.water_class_values, GROUND_TRUTH_THRESHOLD))
            }
        }
    }

    pub fn positives(&self) -> Result<usize> {
        let mut n = 0;
        for e in &self.entries {
            if self.truth_of(e)?.is_flooded() {
                n += 1;
            }
        }
        Ok(n)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serialises to the JSON manifest format; paths are written as given.
    pub fn to_json(&self) -> Result<String> {
        let file = ManifestFile {
            name: self.name.clone(),
            layout: self.layout,
            entries: self
                .entries
                .iter()
                .map(|e| match &e.truth {
                    GroundTruth::Label(l) => EntryFile {
                        image: e.image.clone(),
                        label: Some(*l),
                        mask: None,
                    },
                    GroundTruth::Mask(m) => EntryFile {
                        image: e.image.clone(),
                        label: None,
                        mask: Some(m.clone()),
                    },
                })
                .collect(),
            water_class_values: self.water_class_values.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    /// Reads a JSON manifest. Relative paths are resolved against the
    /// manifest's directory and every referenced file must exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let file: ManifestFile = serde_json::from_str(text)?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let mut entries = Vec::with_capacity(file.entries.len());
        for e in file.entries {
            let image = resolve(e.image);
            if !image.exists() {
                return Err(Error::FileNotFound(image));
            }
            let truth = match (e.label, e.mask) {
                (Some(l), None) => GroundTruth::Label(l),
                (None, Some(m)) => {
                    let m = resolve(m);
                    if !m.exists() {
                        return Err(Error::FileNotFound(m));
                    }
                    GroundTruth::Mask(m)
                }
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "entry {} needs exactly one of label or mask",
                        image.display()
                    )))
                }
            };
            entries.push(ManifestEntry { image, truth });
        }
        if entries.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            name: file.name,
            layout: file.layout,
            entries,
            water_class_values: file.water_class_values,
        })
    }
}

/// Scans `root` and builds a manifest with entries sorted by path.
pub fn load_manifest(
    root: impl AsRef<Path>,
    layout: DatasetLayout,
    water_class_values: &[u8],
    folders: &ClassFolders,
) -> Result<DatasetManifest> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::FileNotFound(root.to_path_buf()));
    }
    let mut entries = Vec::new();
    match layout {
        DatasetLayout::FolderPerClass => {
            let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
                .map_err(|e| Error::io(root, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            dirs.sort();
            for dir in dirs {
                let name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
                let label = if name == folders.flooded {
                    FloodLabel::Flooded
                } else if name == folders.normal {
                    FloodLabel::NonFlooded
                } else {
                    return Err(Error::UnknownClassFolder(name));
                };
                for image in sorted_files(&dir)? {
                    entries.push(ManifestEntry {
                        image,
                        truth: GroundTruth::Label(label),
                    });
                }
            }
        }
        DatasetLayout::ImagePlusMask => {
            let masks = sorted_files(&root.join("masks"))?;
            for image in sorted_files(&root.join("images"))? {
                let s = stem(&image);
                let mask = masks
                    .iter()
                    .find(|m| {
                        let ms = stem(m);
                        ms == s || ms.strip_suffix("_lab") == Some(s.as_str())
                    })
                    .ok_or_else(|| Error::UnpairedImage(s.clone()))?;
                entries.push(ManifestEntry {
                    image,
                    truth: GroundTruth::Mask(mask.clone()),
                });
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    entries.sort_by(|a, b| a.image.cmp(&b.image));
    let name = root.file_name().unwrap_or_default().to_string_lossy().into_owned();
    Ok(DatasetManifest {
        name,
        layout,
        entries,
        water_class_values: water_class_values.to_vec(),
    })
}
