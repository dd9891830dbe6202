//! Uniform random pairing: a policy that ignores its own observations, used
//! to check that confidence-interval coverage does not depend on RUCB.

use rand::Rng;

use crate::duel::DuelOutcome;
use crate::rucb::WinMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomPairing {
    wins: WinMatrix,
}

impl RandomPairing {
    pub fn new(k: usize) -> Self {
        RandomPairing { wins: WinMatrix::new(k) }
    }

    /// Uniform ordered pair of distinct arms. With a single arm the only
    /// possible duel is the self-duel.
    pub fn next_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let k = self.wins.k();
        if k == 1 {
            return (0, 0);
        }
        let i = rng.gen_range(0..k);
        let mut j = rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        (i, j)
    }

    pub fn observe(&mut self, outcome: &DuelOutcome) {
        self.wins.record(outcome);
    }

    pub fn wins(&self) -> &WinMatrix {
        &self.wins
    }
}
