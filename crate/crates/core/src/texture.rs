//! Local Binary Pattern texture codes, histograms and histogram distances.
//!
//! Codes use the basic 8-neighbour operator: neighbour `i` sets bit `i` when
//! its value is greater than or equal to the centre. Neighbours are sampled
//! at the given radius (no interpolation), starting top-left and moving
//! clockwise, so bit 0 is the top-left sample and bit 7 the left one.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

pub const LBP_BINS: usize = 256;
pub const FEATURE_LEN: usize = 2 * LBP_BINS;

/// Additive guard in the chi-square denominator.
pub const CHI_SQUARE_EPS: f64 = 1e-10;

const NORMALIZATION_TOL: f64 = 1e-9;

/// Neighbour offsets `(dx, dy)` in bit order for a unit radius.
pub const NEIGHBOUR_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// Per-pixel LBP codes over the interior of a gray image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbpMap {
    width: usize,
    height: usize,
    radius: usize,
    codes: Vec<u8>,
}

impl LbpMap {
    /// Wraps precomputed codes, mostly useful for tests and fixtures.
    pub fn from_codes(width: usize, height: usize, radius: usize, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != width * height {
            return Err(Error::mismatch(width * height, codes.len()));
        }
        Ok(Self {
            width,
            height,
            radius,
            codes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Computes the LBP code of every pixel at least `radius` away from the border.
pub fn lbp_map(img: &GrayImage, radius: usize) -> Result<LbpMap> {
    if !(1..=2).contains(&radius) {
        return Err(Error::InvalidRadius(radius));
    }
    let (w, h) = (img.width(), img.height());
    if w <= 2 * radius || h <= 2 * radius {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: 2 * radius + 1,
        });
    }
    let (out_w, out_h) = (w - 2 * radius, h - 2 * radius);
    let r = radius as isize;
    let stride = w as isize;
    let deltas = NEIGHBOUR_OFFSETS.map(|(dx, dy)| dy * r * stride + dx * r);
    let src = img.data();

    let mut codes = Vec::with_capacity(out_w * out_h);
    for y in radius..h - radius {
        let row = (y * w) as isize;
        for x in radius..w - radius {
            let c = row + x as isize;
            let center = src[c as usize];
            let mut code = 0u8;
            for (bit, d) in deltas.iter().enumerate() {
                if src[(c + d) as usize] >= center {
                    code |= 1 << bit;
                }
            }
            codes.push(code);
        }
    }
    Ok(LbpMap {
        width: out_w,
        height: out_h,
        radius,
        codes,
    })
}

/// Frequency vector over LBP codes (or any bin set).
#[derive(Debug, Clone, PartialEq)]
pub struct LbpHistogram {
    bins: Vec<f64>,
    normalized: bool,
    empty: bool,
}

impl LbpHistogram {
    /// Wraps raw bins, marking them normalized when they sum to one.
    pub fn from_bins(bins: Vec<f64>) -> Self {
        let total: f64 = bins.iter().sum();
        let empty = bins.iter().all(|&b| b == 0.0);
        let normalized = (total - 1.0).abs() <= NORMALIZATION_TOL && bins.iter().all(|&b| b >= 0.0);
        Self {
            bins,
            normalized,
            empty,
        }
    }

    /// Normalized histogram of codes; an empty slice yields the all-zero histogram.
    pub fn from_codes(codes: impl IntoIterator<Item = u8>) -> Self {
        let mut counts = [0u64; LBP_BINS];
        let mut total = 0u64;
        for c in codes {
            counts[c as usize] += 1;
            total += 1;
        }
        if total == 0 {
            return Self {
                bins: vec![0.0; LBP_BINS],
                normalized: true,
                empty: true,
            };
        }
        let bins = counts.iter().map(|&n| n as f64 / total as f64).collect();
        Self {
            bins,
            normalized: true,
            empty: false,
        }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn into_bins(self) -> Vec<f64> {
        self.bins
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// True when no pixel contributed.
    pub fn is_empty(&self) -> bool {
        self.empty
    }
}

/// Histogram of `map`, optionally restricted to pixels where `mask` is true.
pub fn lbp_histogram(map: &LbpMap, mask: Option<&[bool]>) -> Result<LbpHistogram> {
    match mask {
        None => Ok(LbpHistogram::from_codes(map.codes.iter().copied())),
        Some(mask) => {
            if mask.len() != map.codes.len() {
                return Err(Error::mismatch(
                    format!("mask of {} pixels", map.codes.len()),
                    mask.len(),
                ));
            }
            Ok(LbpHistogram::from_codes(
                map.codes.iter().zip(mask).filter(|(_, &m)| m).map(|(&c, _)| c),
            ))
        }
    }
}

/// Fixed-length classifier input: radius-1 then radius-2 LBP histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct LbpFeature512 {
    values: Vec<f64>,
}

impl LbpFeature512 {
    /// Accepts any 512-long vector; the classifier does not require normalized halves.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_LEN {
            return Err(Error::mismatch(FEATURE_LEN, values.len()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn lbp_feature_512(img: &GrayImage) -> Result<LbpFeature512> {
    let near = lbp_histogram(&lbp_map(img, 1)?, None)?;
    let far = lbp_histogram(&lbp_map(img, 2)?, None)?;
    let mut values = near.into_bins();
    values.extend(far.into_bins());
    Ok(LbpFeature512 { values })
}

/// Chi-square distance `½ Σ (a − b)² / (a + b + ε)` between normalized histograms.
pub fn histogram_distance(a: &LbpHistogram, b: &LbpHistogram) -> Result<f64> {
    if !(a.normalized || a.empty) || !(b.normalized || b.empty) {
        return Err(Error::NotNormalized);
    }
    if a.bins.len() != b.bins.len() {
        return Err(Error::mismatch(a.bins.len(), b.bins.len()));
    }
    let sum: f64 = a
        .bins
        .iter()
        .zip(&b.bins)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d / (x + y + CHI_SQUARE_EPS)
        })
        .sum();
    Ok(0.5 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gray3(center: u8, ring: [u8; 8]) -> GrayImage {
        // ring is clockwise from top-left
        let d = vec![
            ring[0], ring[1], ring[2], ring[7], center, ring[3], ring[6], ring[5], ring[4],
        ];
        GrayImage::new(3, 3, d).unwrap()
    }

    #[test]
    fn constant_image_all_ones() {
        let img = GrayImage::from_fn(6, 5, |_, _| 7);
        let map = lbp_map(&img, 1).unwrap();
        assert_eq!((map.width(), map.height()), (4, 3));
        assert!(map.codes().iter().all(|&c| c == 255));
    }

    #[test]
    fn dark_ring_gives_zero() {
        let map = lbp_map(&gray3(5, [0; 8]), 1).unwrap();
        assert_eq!(map.codes(), &[0]);
    }

    #[test]
    fn alternating_ring_gives_170() {
        let map = lbp_map(&gray3(5, [1, 6, 2, 7, 3, 8, 4, 9]), 1).unwrap();
        assert_eq!(map.codes(), &[0b1010_1010]);
    }

    #[test]
    fn radius_two_samples_at_offset_two() {
        // only the top-right sample at offset 2 (bit 2) reaches the centre value
        let img = GrayImage::from_fn(5, 5, |x, y| match (x, y) {
            (2, 2) => 5,
            (4, 0) => 9,
            (3, 1) => 200, // radius-1 neighbour, must be ignored
            _ => 3,
        });
        let map = lbp_map(&img, 2).unwrap();
        assert_eq!((map.width(), map.height()), (1, 1));
        assert_eq!(map.codes(), &[1 << 2]);
    }

    #[test]
    fn too_small_and_bad_radius() {
        let img = GrayImage::from_fn(4, 4, |_, _| 0);
        assert!(matches!(lbp_map(&img, 2), Err(Error::ImageTooSmall { .. })));
        assert!(matches!(lbp_map(&img, 3), Err(Error::InvalidRadius(3))));
        let thin = GrayImage::from_fn(2, 9, |_, _| 0);
        assert!(matches!(lbp_map(&thin, 1), Err(Error::ImageTooSmall { .. })));
    }

    #[test]
    fn histogram_full_and_masked() {
        let map = LbpMap::from_codes(2, 2, 1, vec![255; 4]).unwrap();
        let h = lbp_histogram(&map, None).unwrap();
        assert_eq!(h.bins()[255], 1.0);
        assert_eq!(h.bins().iter().sum::<f64>(), 1.0);

        let map = LbpMap::from_codes(2, 2, 1, vec![0, 0, 170, 170]).unwrap();
        let h = lbp_histogram(&map, Some(&[false, false, true, true])).unwrap();
        assert_eq!(h.bins()[170], 1.0);
        assert_eq!(h.bins()[0], 0.0);
    }

    #[test]
    fn histogram_empty_region_and_mismatch() {
        let map = LbpMap::from_codes(2, 1, 1, vec![3, 4]).unwrap();
        let h = lbp_histogram(&map, Some(&[false, false])).unwrap();
        assert!(h.is_empty());
        assert!(h.bins().iter().all(|&b| b == 0.0));
        assert!(matches!(
            lbp_histogram(&map, Some(&[true])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn histogram_matches_counting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let codes: Vec<u8> = (0..256).map(|_| rng.random()).collect();
        let map = LbpMap::from_codes(16, 16, 1, codes.clone()).unwrap();
        let h = lbp_histogram(&map, None).unwrap();
        for bin in 0..256 {
            let count = codes.iter().filter(|&&c| c as usize == bin).count();
            assert_eq!(h.bins()[bin], count as f64 / 256.0);
        }
    }

    #[test]
    fn feature_of_constant_image() {
        let img = GrayImage::from_fn(10, 10, |_, _| 42);
        let f = lbp_feature_512(&img).unwrap();
        assert_eq!(f.values().len(), 512);
        for (i, &v) in f.values().iter().enumerate() {
            let want = if i == 255 || i == 511 { 1.0 } else { 0.0 };
            assert_eq!(v, want, "index {i}");
        }
    }

    #[test]
    fn feature_is_composition_of_two_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let img = GrayImage::from_fn(32, 32, |_, _| rng.random());
        let f = lbp_feature_512(&img).unwrap();
        let h1 = lbp_histogram(&lbp_map(&img, 1).unwrap(), None).unwrap();
        let h2 = lbp_histogram(&lbp_map(&img, 2).unwrap(), None).unwrap();
        assert_eq!(&f.values()[..256], h1.bins());
        assert_eq!(&f.values()[256..], h2.bins());
        assert!((f.values()[..256].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((f.values()[256..].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(matches!(
            lbp_feature_512(&GrayImage::from_fn(4, 8, |_, _| 0)),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn chi_square_hand_values() {
        let a = LbpHistogram::from_bins(vec![1.0, 0.0]);
        let b = LbpHistogram::from_bins(vec![0.0, 1.0]);
        assert!((histogram_distance(&a, &b).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(histogram_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn chi_square_rejects_bad_inputs() {
        let a = LbpHistogram::from_bins(vec![0.5, 0.2]);
        let b = LbpHistogram::from_bins(vec![0.5, 0.5]);
        assert!(matches!(histogram_distance(&a, &b), Err(Error::NotNormalized)));
        let c = LbpHistogram::from_bins(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            histogram_distance(&b, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn normalized(raw: Vec<u32>) -> LbpHistogram {
        let total: u32 = raw.iter().sum::<u32>().max(1);
        let mut bins: Vec<f64> = raw.iter().map(|&v| v as f64 / total as f64).collect();
        if raw.iter().all(|&v| v == 0) {
            bins[0] = 1.0;
        }
        LbpHistogram::from_bins(bins)
    }

    proptest! {
        #[test]
        fn chi_square_is_a_semimetric(
            a in prop::collection::vec(0u32..1000, 16),
            b in prop::collection::vec(0u32..1000, 16),
        ) {
            let (ha, hb) = (normalized(a), normalized(b));
            prop_assume!(ha.is_normalized() && hb.is_normalized());
            let dab = histogram_distance(&ha, &hb).unwrap();
            let dba = histogram_distance(&hb, &ha).unwrap();
            prop_assert!(dab >= 0.0);
            prop_assert_eq!(dab, dba);
            prop_assert_eq!(histogram_distance(&ha, &ha).unwrap(), 0.0);
        }

        #[test]
        fn codes_invariant_under_monotone_remap(
            pixels in prop::collection::vec(0u8..100, 100),
            steps in prop::collection::vec(1u8..=2, 100),
            offset in 0u8..50,
        ) {
            // strictly increasing map v -> offset + (number of steps below v)
            let mut table = [0u8; 100];
            let mut acc = offset as u32;
            for (v, s) in steps.iter().enumerate() {
                table[v] = acc as u8;
                acc += *s as u32;
            }
            let img = GrayImage::new(10, 10, pixels.clone()).unwrap();
            let remapped = GrayImage::new(10, 10, pixels.iter().map(|&p| table[p as usize]).collect()).unwrap();
            for r in 1..=2 {
                prop_assert_eq!(lbp_map(&img, r).unwrap(), lbp_map(&remapped, r).unwrap());
            }
        }
    }
}
