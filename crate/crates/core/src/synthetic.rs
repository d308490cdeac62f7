//! Seeded synthetic aerial scenes with known water masks.
//!
//! Water is rendered as a sawtooth ripple (wave crests travelling along +x)
//! with a little per-pixel glitter. The main distractor is "wet soil": the
//! same base color and the same brightness range as the water, but organised
//! in flat blocks, so it cannot be told apart from water by color alone. Two background
//! families stand in for two geographies:
//!
//! * [`Family::A`]: blocky vegetation and smooth pavement.
//! * [`Family::B`]: striped crop rows and tiled roofs.
//!
//! Ground truth comes from construction, so scenes double as test oracles.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::RgbImage;
use crate::segmentation::decide;
use crate::FloodLabel;

/// Side length of generated scenes.
pub const SCENE_SIZE: usize = 64;

/// Background family, i.e. the stand-in for a geographic region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::A => "generator-A",
            Family::B => "generator-B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Material {
    Water,
    WetSoil,
    Vegetation,
    Pavement,
    Crops,
    Roofs,
}

/// A generated scene plus its full-resolution water mask.
#[derive(Debug, Clone)]
pub struct Scene {
    pub image: RgbImage,
    pub water_mask: Vec<bool>,
}

impl Scene {
    pub fn water_fraction(&self) -> f64 {
        self.water_mask.iter().filter(|&&w| w).count() as f64 / self.water_mask.len() as f64
    }

    /// Ground-truth label under the 25 % water rule.
    pub fn label(&self) -> FloodLabel {
        decide(self.water_fraction(), 0.25)
    }

    /// Water mask restricted to the radius-1 LBP interior.
    pub fn interior_mask(&self) -> Vec<bool> {
        let (w, h) = (self.image.width(), self.image.height());
        let mut out = Vec::with_capacity((w - 2) * (h - 2));
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                out.push(self.water_mask[y * w + x]);
            }
        }
        out
    }

    /// 0/255 mask image, the layout expected by mask-based manifests.
    pub fn mask_image(&self) -> crate::imaging::GrayImage {
        crate::imaging::GrayImage::from_fn(self.image.width(), self.image.height(), |x, y| {
            if self.water_mask[y * self.image.width() + x] {
                255
            } else {
                0
            }
        })
    }
}

/// Per-scene texture parameters drawn once so regions stay coherent.
struct Palette {
    water_base: [f64; 3],
    wave_period: f64,
    wave_phase: f64,
    block_levels: Vec<f64>,
    stripe_vertical: bool,
}

/// Half the brightness swing of a ripple crest-to-trough.
const RIPPLE_AMPLITUDE: f64 = 12.0;
/// Per-pixel sparkle added on top of the ripple.
const GLITTER: f64 = 1.5;
const BLOCK: usize = 8;

impl Palette {
    fn draw(rng: &mut ChaCha8Rng, size: usize) -> Self {
        let blocks = size.div_ceil(BLOCK) + 1;
        Self {
            water_base: [
                rng.random_range(115.0..140.0),
                rng.random_range(95.0..115.0),
                rng.random_range(70.0..90.0),
            ],
            wave_period: rng.random_range(5.0..8.0),
            wave_phase: rng.random_range(0.0..1.0),
            block_levels: (0..blocks * blocks * 2).map(|_| rng.random_range(-1.0..1.0)).collect(),
            stripe_vertical: rng.random_bool(0.5),
        }
    }

    fn block_level(&self, x: usize, y: usize, layer: usize, size: usize) -> f64 {
        let blocks = size.div_ceil(BLOCK) + 1;
        self.block_levels[layer * blocks * blocks + (y / BLOCK) * blocks + x / BLOCK]
    }

    fn shade(&self, m: Material, x: usize, y: usize, size: usize, rng: &mut ChaCha8Rng) -> [u8; 3] {
        let (base, offset) = match m {
            Material::Water => {
                // sawtooth crests travelling along +x
                let phase = (x as f64 / self.wave_period + self.wave_phase).fract();
                let ripple = RIPPLE_AMPLITUDE * (2.0 * phase - 1.0);
                (self.water_base, ripple + GLITTER * rng.random_range(-1.0..1.0))
            }
            Material::WetSoil => (self.water_base, RIPPLE_AMPLITUDE * self.block_level(x, y, 0, size)),
            Material::Vegetation => ([58.0, 128.0, 44.0], 6.0 * self.block_level(x, y, 1, size)),
            Material::Pavement => ([178.0, 178.0, 172.0], 0.0),
            Material::Crops => {
                let along = if self.stripe_vertical { x } else { y };
                if (along / 4) % 2 == 0 {
                    ([84.0, 140.0, 52.0], 0.0)
                } else {
                    ([112.0, 156.0, 66.0], 0.0)
                }
            }
            Material::Roofs => {
                if ((x / 12) + (y / 12)).is_multiple_of(2) {
                    ([186.0, 84.0, 62.0], 0.0)
                } else {
                    ([160.0, 70.0, 54.0], 0.0)
                }
            }
        };
        base.map(|c| (c + offset).round().clamp(0.0, 255.0) as u8)
    }
}

/// Geometric layout: which material covers each pixel.
#[derive(Debug, Clone)]
pub enum Layout {
    /// Half-plane split along a random direction; the first material covers
    /// `fraction` of the image.
    Split {
        first: Material,
        fraction: f64,
        rest: Box<Layout>,
    },
    /// Disc of `fraction` area centred at a random point.
    Pond {
        pond: Material,
        fraction: f64,
        rest: Box<Layout>,
    },
    Fill(Material),
}

impl Layout {
    pub fn fill(m: Material) -> Self {
        Layout::Fill(m)
    }

    pub fn split(first: Material, fraction: f64, rest: Layout) -> Self {
        Layout::Split {
            first,
            fraction,
            rest: Box::new(rest),
        }
    }

    pub fn pond(pond: Material, fraction: f64, rest: Layout) -> Self {
        Layout::Pond {
            pond,
            fraction,
            rest: Box::new(rest),
        }
    }

    fn paint(&self, assign: &mut [Option<Material>], size: usize, rng: &mut ChaCha8Rng) {
        let free: Vec<usize> = (0..assign.len()).filter(|&i| assign[i].is_none()).collect();
        match self {
            Layout::Fill(m) => {
                for i in free {
                    assign[i] = Some(*m);
                }
            }
            Layout::Split { first, fraction, rest } => {
                let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (c, s) = (angle.cos(), angle.sin());
                let mut order: Vec<(f64, usize)> = free
                    .iter()
                    .map(|&i| (((i % size) as f64) * c + ((i / size) as f64) * s, i))
                    .collect();
                order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let take = (fraction * (size * size) as f64).round() as usize;
                for &(_, i) in order.iter().take(take.min(order.len())) {
                    assign[i] = Some(*first);
                }
                rest.paint(assign, size, rng);
            }
            Layout::Pond { pond, fraction, rest } => {
                let radius = (fraction * (size * size) as f64 / std::f64::consts::PI).sqrt();
                let lo = radius.min(size as f64 / 2.0);
                let cx = rng.random_range(lo..=(size as f64 - lo).max(lo));
                let cy = rng.random_range(lo..=(size as f64 - lo).max(lo));
                for &i in &free {
                    let (x, y) = ((i % size) as f64 + 0.5, (i / size) as f64 + 0.5);
                    if (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius {
                        assign[i] = Some(*pond);
                    }
                }
                rest.paint(assign, size, rng);
            }
        }
    }
}

/// Renders `layout` into a `size x size` scene.
pub fn render(layout: &Layout, size: usize, rng: &mut ChaCha8Rng) -> Scene {
    let palette = Palette::draw(rng, size);
    let mut assign = vec![None; size * size];
    layout.paint(&mut assign, size, rng);
    let materials: Vec<Material> = assign.into_iter().map(|m| m.unwrap_or(Material::Pavement)).collect();
    let image = RgbImage::from_fn(size, size, |x, y| palette.shade(materials[y * size + x], x, y, size, rng));
    Scene {
        image,
        water_mask: materials.iter().map(|&m| m == Material::Water).collect(),
    }
}

fn backgrounds(family: Family) -> [Material; 2] {
    match family {
        Family::A => [Material::Vegetation, Material::Pavement],
        Family::B => [Material::Crops, Material::Roofs],
    }
}

/// Scene with a large water body (45-70 % of the area).
pub fn flooded_scene(family: Family, rng: &mut ChaCha8Rng) -> Scene {
    let [bg1, bg2] = backgrounds(family);
    let water = rng.random_range(0.45..0.70);
    let other = if rng.random_bool(0.5) { Material::WetSoil } else { bg1 };
    let second = rng.random_range(0.1..0.5) * (1.0 - water);
    let layout = Layout::split(Material::Water, water, Layout::split(other, second, Layout::fill(bg2)));
    render(&layout, SCENE_SIZE, rng)
}

/// Scene without flooding: either no water at all or a small pond
/// (at most 15 %) next to wet soil.
pub fn dry_scene(family: Family, rng: &mut ChaCha8Rng) -> Scene {
    let [bg1, bg2] = backgrounds(family);
    let layout = match rng.random_range(0..3) {
        0 => Layout::pond(
            Material::Water,
            rng.random_range(0.05..0.15),
            Layout::split(Material::WetSoil, rng.random_range(0.3..0.5), Layout::fill(bg1)),
        ),
        1 => Layout::split(Material::WetSoil, rng.random_range(0.3..0.6), Layout::fill(bg2)),
        _ => Layout::split(bg1, rng.random_range(0.3..0.7), Layout::fill(bg2)),
    };
    render(&layout, SCENE_SIZE, rng)
}

/// Balanced corpus: `per_class` flooded scenes followed by `per_class` dry ones.
pub fn corpus(family: Family, per_class: usize, seed: u64) -> Vec<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Scene> = (0..per_class).map(|_| flooded_scene(family, &mut rng)).collect();
    out.extend((0..per_class).map(|_| dry_scene(family, &mut rng)));
    out
}

/// The 60-scene benchmark (30 flooded, 30 dry) over family A backgrounds.
pub fn benchmark(seed: u64) -> Vec<Scene> {
    corpus(Family::A, 30, seed)
}

/// Pure water patches with fresh colors, used to build reference signatures
/// that share nothing with the evaluated scenes except the water texture.
pub fn water_patches(count: usize, size: usize, seed: u64) -> Vec<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5_EED0_FFA7_E5);
    (0..count)
        .map(|_| render(&Layout::fill(Material::Water), size, &mut rng))
        .collect()
}

/// Writes scenes as `root/flooded/NNNN.png` and `root/normal/NNNN.png`.
pub fn write_folder_per_class(scenes: &[Scene], root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    for dir in ["flooded", "normal"] {
        std::fs::create_dir_all(root.join(dir)).map_err(|e| Error::io(root, e))?;
    }
    for (i, s) in scenes.iter().enumerate() {
        let dir = if s.label().is_flooded() { "flooded" } else { "normal" };
        s.image.save_png(root.join(dir).join(format!("{i:04}.png")))?;
    }
    Ok(())
}

/// Writes scenes as `root/images/NNNN.png` with 0/255 masks in `root/masks/`.
pub fn write_image_plus_mask(scenes: &[Scene], root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    for dir in ["images", "masks"] {
        std::fs::create_dir_all(root.join(dir)).map_err(|e| Error::io(root, e))?;
    }
    for (i, s) in scenes.iter().enumerate() {
        s.image.save_png(root.join("images").join(format!("{i:04}.png")))?;
        s.mask_image().save_png(root.join("masks").join(format!("{i:04}.png")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_labels_follow_construction() {
        let scenes = benchmark(7);
        assert_eq!(scenes.len(), 60);
        for s in &scenes[..30] {
            assert!(s.water_fraction() >= 0.40, "{}", s.water_fraction());
            assert_eq!(s.label(), FloodLabel::Flooded);
        }
        for s in &scenes[30..] {
            assert!(s.water_fraction() <= 0.16);
            assert_eq!(s.label(), FloodLabel::NonFlooded);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = corpus(Family::B, 3, 11);
        let b = corpus(Family::B, 3, 11);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.image, y.image);
            assert_eq!(x.water_mask, y.water_mask);
        }
    }

    #[test]
    fn interior_mask_size() {
        let s = &water_patches(1, 16, 0)[0];
        assert_eq!(s.interior_mask().len(), 14 * 14);
        assert!(s.interior_mask().iter().all(|&w| w));
    }
}
