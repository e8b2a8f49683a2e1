//! Synthetic attribute sets with planted meaningful structure.

use rand::seq::index::sample;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{tail_mask, words_for, AttributeMatrix};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    /// Pool the planted attributes are mixed from.
    pub base: AttributeMatrix,
    pub n_meaningful: usize,
    pub n_noise: usize,
    /// Per-entry sign-flip probability, in `[0, 0.5)`.
    pub flip_rate: f64,
    /// Base columns mixed into each planted attribute.
    pub combine_width: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    /// Planted columns first, then noise columns.
    pub matrix: AttributeMatrix,
    /// `true` for planted-meaningful columns.
    pub truth: Vec<bool>,
    /// Base columns and simplex weights behind each planted column.
    pub sources: Vec<Vec<(usize, f64)>>,
}

/// Generates `n_meaningful` attributes as `sign(Σ w_i b_i)` over
/// `combine_width` distinct random base columns with uniform simplex weights
/// (zero sums map to `+1`), flips each entry with probability `flip_rate`, and
/// appends `n_noise` uniform random attributes.
pub fn plant_meaningful(spec: &PlantSpec) -> Result<Planted> {
    let base = &spec.base;
    if base.is_empty() && spec.n_meaningful > 0 {
        return Err(Error::InvalidConfig("planting needs a nonempty base".into()));
    }
    if !(0.0..0.5).contains(&spec.flip_rate) {
        return Err(Error::InvalidConfig(format!(
            "flip rate must lie in [0, 0.5), got {}",
            spec.flip_rate
        )));
    }
    if spec.combine_width == 0 || (spec.n_meaningful > 0 && spec.combine_width > base.n_columns()) {
        return Err(Error::InvalidConfig(format!(
            "combine width {} for a base of {} attributes",
            spec.combine_width,
            base.n_columns()
        )));
    }
    let n = base.n_exemplars();
    let mut rng = stream(spec.seed, Purpose::Plant, &[]);
    let mut columns: Vec<Vec<i8>> = Vec::with_capacity(spec.n_meaningful + spec.n_noise);
    let mut sources = Vec::with_capacity(spec.n_meaningful);

    let base_cols = base.to_columns();
    for _ in 0..spec.n_meaningful {
        let picks = sample(&mut rng, base.n_columns(), spec.combine_width).into_vec();
        let weights = simplex_weights(&mut rng, picks.len());
        let mut column: Vec<i8> = (0..n)
            .map(|i| {
                let sum: f64 = picks
                    .iter()
                    .zip(&weights)
                    .map(|(&p, w)| w * f64::from(base_cols[p][i]))
                    .sum();
                if sum >= 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        if spec.flip_rate > 0.0 {
            for v in column.iter_mut() {
                if rng.gen::<f64>() < spec.flip_rate {
                    *v = -*v;
                }
            }
        }
        columns.push(column);
        sources.push(picks.into_iter().zip(weights).collect());
    }
    for _ in 0..spec.n_noise {
        columns.push(random_column(&mut rng, n));
    }

    let names = (0..spec.n_meaningful)
        .map(|i| format!("planted{i}"))
        .chain((0..spec.n_noise).map(|i| format!("noise{i}")))
        .collect();
    let mut truth = vec![true; spec.n_meaningful];
    truth.resize(spec.n_meaningful + spec.n_noise, false);
    Ok(Planted {
        matrix: AttributeMatrix::from_columns(n, &columns, Some(names))?,
        truth,
        sources,
    })
}

fn simplex_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    // Normalised unit exponentials are uniform on the simplex.
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn random_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    let words = words_for(n);
    let mut out = Vec::with_capacity(n);
    for w in 0..words {
        let word = rng.next_u64() & if w + 1 == words { tail_mask(n) } else { u64::MAX };
        for b in 0..64.min(n - w * 64) {
            out.push(if word >> b & 1 == 1 { 1 } else { -1 });
        }
    }
    out
}

/// Parameters of a labelled attribute set generated from hidden factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolSpec {
    pub n_exemplars: usize,
    /// Hidden uniform random factors.
    pub n_latent: usize,
    pub n_attributes: usize,
    pub flip_rate: f64,
    pub combine_width: usize,
    pub seed: u64,
}

/// A labelled set whose attributes are planted mixtures of hidden factors.
/// Attributes sharing factors reconstruct one another; attributes on rarely
/// used factors are nearly independent.
pub fn meaningful_pool(spec: &PoolSpec) -> Result<AttributeMatrix> {
    let latent = plant_meaningful(&PlantSpec {
        base: AttributeMatrix::empty(spec.n_exemplars),
        n_meaningful: 0,
        n_noise: spec.n_latent,
        flip_rate: 0.0,
        combine_width: 1,
        seed: crate::rng::derive_seed(spec.seed, &[Purpose::Fixture as u64]),
    })?;
    let planted = plant_meaningful(&PlantSpec {
        base: latent.matrix,
        n_meaningful: spec.n_attributes,
        n_noise: 0,
        flip_rate: spec.flip_rate,
        combine_width: spec.combine_width,
        seed: spec.seed,
    })?;
    let names = (0..spec.n_attributes).map(|i| format!("attr{i}")).collect();
    planted.matrix.with_names(Some(names))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolate::{gen_noise, NoiseSpec};
    use crate::reconstruct::{attribute_distance, correlation, delta_cvx, DistanceKind};

    fn base(n: usize, count: usize, seed: u64) -> AttributeMatrix {
        gen_noise(&NoiseSpec {
            n_exemplars: n,
            count,
            seed,
        })
    }

    fn spec(base: AttributeMatrix) -> PlantSpec {
        PlantSpec {
            base,
            n_meaningful: 4,
            n_noise: 2,
            flip_rate: 0.0,
            combine_width: 1,
            seed: 3,
        }
    }

    #[test]
    fn width_one_without_flips_copies_base() {
        let b = base(50, 5, 1);
        let p = plant_meaningful(&spec(b.clone())).unwrap();
        assert_eq!(p.truth, vec![true, true, true, true, false, false]);
        for (k, src) in p.sources.iter().enumerate() {
            assert_eq!(src.len(), 1);
            assert_eq!(p.matrix.column_values(k), b.column_values(src[0].0));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let b = base(50, 5, 1);
        let s = PlantSpec {
            flip_rate: 0.2,
            combine_width: 3,
            ..spec(b)
        };
        assert_eq!(plant_meaningful(&s).unwrap(), plant_meaningful(&s).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let b = base(10, 2, 1);
        assert!(plant_meaningful(&PlantSpec {
            flip_rate: 0.5,
            ..spec(b.clone())
        })
        .is_err());
        assert!(plant_meaningful(&PlantSpec {
            combine_width: 3,
            ..spec(b.clone())
        })
        .is_err());
        assert!(plant_meaningful(&PlantSpec {
            combine_width: 0,
            ..spec(b)
        })
        .is_err());
        assert!(plant_meaningful(&spec(AttributeMatrix::empty(10))).is_err());
    }

    #[test]
    fn no_planting_gives_unrelated_columns() {
        let b = base(400, 8, 2);
        let p = plant_meaningful(&PlantSpec {
            n_meaningful: 0,
            n_noise: 50,
            ..spec(b.clone())
        })
        .unwrap();
        let mut total = 0.0;
        for k in 0..50 {
            for j in 0..8 {
                total += correlation(&p.matrix.column(k), &b.column(j)).unwrap();
            }
        }
        let mean = total / 400.0;
        assert!((mean - 0.5).abs() < 0.01, "mean correlation {mean}");
    }

    #[test]
    fn planted_columns_are_far_closer_than_noise() {
        // Empirical percentile oracle: the 1st percentile of hull distances of
        // 1,000 noise columns must exceed every planted column's distance.
        let b = base(200, 16, 7);
        let planted = plant_meaningful(&PlantSpec {
            base: b.clone(),
            n_meaningful: 20,
            n_noise: 0,
            flip_rate: 0.0,
            combine_width: 2,
            seed: 8,
        })
        .unwrap();
        let noise = base(200, 1000, 9);
        let mut noise_d = delta_cvx(&b, &noise).unwrap().per_column_errors;
        noise_d.sort_by(f64::total_cmp);
        let p1 = noise_d[9];
        for k in 0..20 {
            let d = attribute_distance(&planted.matrix.column(k), &b, DistanceKind::ConvexHull).unwrap();
            assert!(d < p1, "planted column {k}: {d} vs 1st percentile {p1}");
        }
    }

    #[test]
    fn separability_degrades_with_flips() {
        let b = base(200, 10, 11);
        let mut last = -1.0;
        for flip in [0.0, 0.1, 0.2, 0.3, 0.4] {
            let p = plant_meaningful(&PlantSpec {
                base: b.clone(),
                n_meaningful: 30,
                n_noise: 0,
                flip_rate: flip,
                combine_width: 3,
                seed: 12,
            })
            .unwrap();
            let d = delta_cvx(&b, &p.matrix).unwrap().distance;
            assert!(d >= last, "flip {flip}: {d} < {last}");
            last = d;
        }
    }

    #[test]
    fn pool_has_requested_shape() {
        let pool = meaningful_pool(&PoolSpec {
            n_exemplars: 64,
            n_latent: 6,
            n_attributes: 12,
            flip_rate: 0.05,
            combine_width: 2,
            seed: 1,
        })
        .unwrap();
        assert_eq!(pool.n_columns(), 12);
        assert_eq!(pool.n_exemplars(), 64);
        assert_eq!(pool.name(3), Some("attr3"));
    }
}
