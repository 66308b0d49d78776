//! Seeded generation of `(tree, φ)` pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::trees::{
    build_kadic, RandomTreeConfig, SplitLaw, StepFunction, Tree, DEFAULT_NODE_BUDGET,
};

/// Trees drawn for each sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TreeFamily {
    /// Homogeneous k-adic trees.
    Kadic { k: usize },
    /// Random weighted trees with 2 to `max_children` children per split.
    Random { max_children: usize },
    /// Binary, triadic and random trees in rotation.
    Mixed,
}

/// Distribution of leaf values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueLaw {
    /// Independent uniform values on `[0, 1)`.
    Uniform,
    /// Independent standard lognormal values.
    LogNormal,
    /// One to three leaves with values up to `1e4`, the rest below `1e-3`.
    SparseSpikes,
    /// A single positive constant.
    Constant,
}

impl ValueLaw {
    pub fn name(&self) -> &'static str {
        match self {
            ValueLaw::Uniform => "uniform",
            ValueLaw::LogNormal => "log-normal",
            ValueLaw::SparseSpikes => "sparse-spikes",
            ValueLaw::Constant => "constant",
        }
    }
}

/// Tree shape actually drawn for a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TreeShape {
    Kadic {
        k: usize,
        depth: u32,
    },
    Random {
        seed: u64,
        max_depth: u32,
        max_children: usize,
    },
}

/// A generated tree with leaf values; `StepFunction` borrows from it.
#[derive(Clone, Debug)]
pub struct Sample {
    pub shape: TreeShape,
    pub tree: Tree,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn step_function(&self) -> StepFunction<'_> {
        StepFunction::new(&self.tree, self.values.clone())
            .expect("generated values are finite and nonnegative")
    }
}

/// Generator for sample `index` under value law number `law_index`.
///
/// Every sample has its own ChaCha8 stream, so a sample can be regenerated
/// without replaying the ones before it.
pub fn sample_rng(seed: u64, law_index: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((law_index as u64) << 32) | index as u64);
    rng
}

pub(crate) fn draw_sample(
    rng: &mut ChaCha8Rng,
    family: TreeFamily,
    depth_range: (u32, u32),
    law: ValueLaw,
    index: usize,
) -> Result<Sample> {
    let depth = rng.random_range(depth_range.0..=depth_range.1);
    let shape = match family {
        TreeFamily::Kadic { k } => TreeShape::Kadic { k, depth },
        TreeFamily::Random { max_children } => TreeShape::Random {
            seed: rng.random(),
            max_depth: depth,
            max_children,
        },
        TreeFamily::Mixed => match index % 3 {
            0 => TreeShape::Kadic { k: 2, depth },
            1 => TreeShape::Kadic {
                k: 3,
                depth: depth.min(6),
            },
            _ => TreeShape::Random {
                seed: rng.random(),
                max_depth: depth,
                max_children: 4,
            },
        },
    };
    let tree = match shape {
        TreeShape::Kadic { k, depth } => build_kadic(k, depth, DEFAULT_NODE_BUDGET)?,
        TreeShape::Random {
            seed,
            max_depth,
            max_children,
        } => RandomTreeConfig::new(seed, max_depth, max_children, SplitLaw::Uniform).build()?,
    };
    let n = tree.leaf_count();
    let values = match law {
        ValueLaw::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        ValueLaw::LogNormal => {
            let dist = LogNormal::new(0.0, 1.0).expect("unit lognormal parameters are valid");
            (0..n).map(|_| dist.sample(rng)).collect()
        }
        ValueLaw::SparseSpikes => {
            let mut values: Vec<f64> = (0..n).map(|_| 1e-3 * rng.random::<f64>()).collect();
            let spikes = rng.random_range(1..=3usize);
            for _ in 0..spikes {
                let leaf = rng.random_range(0..n);
                values[leaf] = 10f64.powf(rng.random_range(1.0..4.0));
            }
            values
        }
        ValueLaw::Constant => vec![rng.random_range(0.5..2.0); n],
    };
    Ok(Sample {
        shape,
        tree,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_order() {
        let a = draw_sample(
            &mut sample_rng(7, 0, 5),
            TreeFamily::Mixed,
            (2, 5),
            ValueLaw::Uniform,
            5,
        )
        .unwrap();
        let _ = draw_sample(
            &mut sample_rng(7, 0, 4),
            TreeFamily::Mixed,
            (2, 5),
            ValueLaw::Uniform,
            4,
        )
        .unwrap();
        let b = draw_sample(
            &mut sample_rng(7, 0, 5),
            TreeFamily::Mixed,
            (2, 5),
            ValueLaw::Uniform,
            5,
        )
        .unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.shape, b.shape);
    }

    #[test]
    fn every_law_gives_valid_functions() {
        for law in [
            ValueLaw::Uniform,
            ValueLaw::LogNormal,
            ValueLaw::SparseSpikes,
            ValueLaw::Constant,
        ] {
            for i in 0..9 {
                let s = draw_sample(&mut sample_rng(1, 0, i), TreeFamily::Mixed, (1, 6), law, i)
                    .unwrap();
                s.tree.validate().unwrap();
                let phi = s.step_function();
                assert!(phi.integral() > 0.0);
            }
        }
    }
}
