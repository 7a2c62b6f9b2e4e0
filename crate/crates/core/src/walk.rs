//! Token walk policies.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// How a token picks its next tree-neighbor when it cannot merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkPolicy {
    /// Uniform over all tree-neighbors.
    Uniform,
    /// Uniform over tree-neighbors other than the one the token just came
    /// from. At a leaf the only neighbor is allowed.
    #[serde(rename = "nobacktrack")]
    NonBacktracking,
}

impl WalkPolicy {
    pub const ALL: [WalkPolicy; 2] = [WalkPolicy::Uniform, WalkPolicy::NonBacktracking];

    pub fn name(self) -> &'static str {
        match self {
            WalkPolicy::Uniform => "uniform",
            WalkPolicy::NonBacktracking => "nobacktrack",
        }
    }
}

impl fmt::Display for WalkPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WalkPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(WalkPolicy::Uniform),
            "nobacktrack" | "non-backtracking" => Ok(WalkPolicy::NonBacktracking),
            other => Err(format!(
                "unknown walk policy {other:?} (expected uniform|nobacktrack)"
            )),
        }
    }
}

/// Order in which the tokens of a two-tree meeting experiment are activated.
///
/// Time is always counted in token activations (one activation moves one
/// token by one edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// Rounds in which every token is activated once, in a freshly shuffled
    /// order. This is what [`World::scheduler_step`](crate::World::scheduler_step) does.
    #[default]
    ShuffledRounds,
    /// Each activation picks one token uniformly at random.
    RandomToken,
}

/// Picks the next position among `candidates` (the tree-neighbors of the
/// token's vertex, in local order).
///
/// `memory` is where the token came from. Under [`WalkPolicy::NonBacktracking`]
/// it is excluded unless it is the only candidate; a memory that is not among
/// the candidates is ignored. Returns `None` when there are no candidates.
pub fn choose_move<T, R>(
    candidates: &[T],
    memory: Option<T>,
    policy: WalkPolicy,
    rng: &mut R,
) -> Option<T>
where
    T: Copy + PartialEq,
    R: Rng + ?Sized,
{
    let d = candidates.len();
    match d {
        0 => None,
        1 => Some(candidates[0]),
        _ => {
            let forbidden = match (policy, memory) {
                (WalkPolicy::NonBacktracking, Some(m)) => candidates.iter().position(|&c| c == m),
                _ => None,
            };
            match forbidden {
                None => Some(candidates[rng.gen_range(0..d)]),
                Some(j) => {
                    let mut r = rng.gen_range(0..d - 1);
                    if r >= j {
                        r += 1;
                    }
                    Some(candidates[r])
                }
            }
        }
    }
}
