//! Classical nonlocal games and their compilation into verifiers.

use serde::{Deserialize, Serialize};

use super::{ProverStrategy, VerifierSpec};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, SparseMatrix, C64};

/// Largest number of Alice strategies `nA^nX` that [`classical_value`] enumerates.
pub const CLASSICAL_BUDGET: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalGame {
    #[serde(rename = "nX")]
    pub n_x: usize,
    #[serde(rename = "nY")]
    pub n_y: usize,
    #[serde(rename = "nA")]
    pub n_a: usize,
    #[serde(rename = "nB")]
    pub n_b: usize,
    /// `pi(x, y)` row-major.
    pub dist: Vec<f64>,
    /// Row-major over `(x, y, a, b)`.
    pub predicate: Vec<bool>,
}

impl ClassicalGame {
    pub fn new(
        (n_x, n_y): (usize, usize),
        (n_a, n_b): (usize, usize),
        dist: Vec<f64>,
        predicate: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(n_x * n_y * n_a * n_b);
        for x in 0..n_x {
            for y in 0..n_y {
                for a in 0..n_a {
                    for b in 0..n_b {
                        table.push(predicate(x, y, a, b));
                    }
                }
            }
        }
        let g = Self { n_x, n_y, n_a, n_b, dist, predicate: table };
        g.validate()?;
        Ok(g)
    }

    /// Uniform question distribution.
    pub fn uniform(
        questions: (usize, usize),
        answers: (usize, usize),
        predicate: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let q = questions.0 * questions.1;
        Self::new(questions, answers, vec![1.0 / q as f64; q], predicate)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_y == 0 || self.n_a == 0 || self.n_b == 0 {
            return Err(Error::Validation("question and answer counts must be positive".into()));
        }
        if self.dist.len() != self.n_x * self.n_y {
            return Err(Error::Validation(format!(
                "distribution has {} entries, expected {}",
                self.dist.len(),
                self.n_x * self.n_y
            )));
        }
        if self.predicate.len() != self.n_x * self.n_y * self.n_a * self.n_b {
            return Err(Error::Validation(format!(
                "predicate has {} entries, expected {}",
                self.predicate.len(),
                self.n_x * self.n_y * self.n_a * self.n_b
            )));
        }
        if self.dist.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Validation("distribution entries must be non-negative".into()));
        }
        let total: f64 = self.dist.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("distribution sums to {total}, expected 1")));
        }
        Ok(())
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n_y + y]
    }

    pub fn accepts(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.predicate[((x * self.n_y + y) * self.n_a + a) * self.n_b + b]
    }

    /// Winning probability of the deterministic strategy `x -> alice[x]`, `y -> bob[y]`.
    pub fn score(&self, alice: &[usize], bob: &[usize]) -> f64 {
        let mut s = 0.0;
        for x in 0..self.n_x {
            for y in 0..self.n_y {
                if self.accepts(x, y, alice[x], bob[y]) {
                    s += self.prob(x, y);
                }
            }
        }
        s
    }
}

pub fn classical_value(game: &ClassicalGame) -> Result<f64> {
    classical_value_with_budget(game, CLASSICAL_BUDGET)
}

/// Exact classical value: all `nA^nX` strategies of Alice, each with Bob's best
/// response per question. Shared randomness cannot do better than the best
/// deterministic pair.
pub fn classical_value_with_budget(game: &ClassicalGame, budget: u64) -> Result<f64> {
    game.validate()?;
    let count = (game.n_a as u64).checked_pow(game.n_x as u32).filter(|&c| c <= budget);
    let Some(count) = count else {
        return Err(Error::Resource(format!(
            "{}^{} deterministic strategies exceed the budget of {budget}",
            game.n_a, game.n_x
        )));
    };
    let mut alice = vec![0usize; game.n_x];
    let mut best = 0.0_f64;
    for _ in 0..count {
        let mut total = 0.0;
        for y in 0..game.n_y {
            let mut col_best = 0.0_f64;
            for b in 0..game.n_b {
                let mut s = 0.0;
                for (x, &a) in alice.iter().enumerate() {
                    if game.accepts(x, y, a, b) {
                        s += game.prob(x, y);
                    }
                }
                col_best = col_best.max(s);
            }
            total += col_best;
        }
        best = best.max(total);
        // next assignment in mixed radix
        for a in alice.iter_mut() {
            *a += 1;
            if *a < game.n_a {
                break;
            }
            *a = 0;
        }
    }
    Ok(best)
}

struct Layout {
    n_x: usize,
    n_y: usize,
    n_a: usize,
    n_b: usize,
}

impl Layout {
    fn d_m1(&self) -> usize {
        self.n_x * self.n_a
    }

    fn d_m2(&self) -> usize {
        self.n_y * self.n_b
    }

    fn d_v(&self) -> usize {
        self.n_x * self.n_y * 2
    }

    fn n(&self) -> usize {
        self.d_v() * self.d_m1() * self.d_m2()
    }

    /// Basis index of `|x, y, acc>_V |x1, a>_M1 |y1, b>_M2`.
    fn index(&self, (x, y, acc): (usize, usize, usize), (x1, a): (usize, usize), (y1, b): (usize, usize)) -> usize {
        let v = (x * self.n_y + y) * 2 + acc;
        let m1 = x1 * self.n_a + a;
        let m2 = y1 * self.n_b + b;
        (v * self.d_m1() + m1) * self.d_m2() + m2
    }
}

/// Verifier that sends `(x, y) ~ pi` as basis states in `M1 = X (x) A`,
/// `M2 = Y (x) B`, keeps a coherent copy of the questions in `V`, and writes
/// the predicate into an accept qubit of `V`.
///
/// `V1` is the Householder reflection taking `|0>` to
/// `sum sqrt(pi(x, y)) |x, y, 0>|x, 0>|y, 0>`; `V2` flips the accept qubit
/// when the predicate fails; `Pi_init = |0><0|` and `Pi_acc` projects the
/// accept qubit onto `|0>`.
pub fn compile_game(game: &ClassicalGame) -> Result<VerifierSpec> {
    game.validate()?;
    let l = Layout { n_x: game.n_x, n_y: game.n_y, n_a: game.n_a, n_b: game.n_b };
    let n = l.n();
    crate::limits::Limits::from_env().check_state_dim("compiled verifier", n)?;
    let one = C64::new(1.0, 0.0);

    // w = e0 - phi on its support
    let mut w: Vec<(usize, f64)> = vec![(0, 1.0)];
    for x in 0..game.n_x {
        for y in 0..game.n_y {
            let amp = game.prob(x, y).sqrt();
            if amp == 0.0 {
                continue;
            }
            let i = l.index((x, y, 0), (x, 0), (y, 0));
            match w.iter_mut().find(|(j, _)| *j == i) {
                Some(e) => e.1 -= amp,
                None => w.push((i, -amp)),
            }
        }
    }
    let w2: f64 = w.iter().map(|(_, z)| z * z).sum();
    let mut v1 = Vec::with_capacity(n + w.len() * w.len());
    v1.extend((0..n).map(|i| (i, i, one)));
    if w2 > 1e-30 {
        for &(i, wi) in &w {
            for &(j, wj) in &w {
                v1.push((i, j, C64::new(-2.0 * wi * wj / w2, 0.0)));
            }
        }
    }
    let v1 = SparseMatrix::from_triplets(n, n, v1)?;

    let mut v2 = Vec::with_capacity(n);
    let mut acc = Vec::with_capacity(n / 2);
    for x in 0..game.n_x {
        for y in 0..game.n_y {
            for bit in 0..2 {
                for x1 in 0..game.n_x {
                    for a in 0..game.n_a {
                        for y1 in 0..game.n_y {
                            for b in 0..game.n_b {
                                let src = l.index((x, y, bit), (x1, a), (y1, b));
                                let flip = usize::from(!game.accepts(x, y, a, b));
                                let dst = l.index((x, y, bit ^ flip), (x1, a), (y1, b));
                                v2.push((dst, src, one));
                                if bit == 0 {
                                    acc.push((src, src, one));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let spec = VerifierSpec {
        d_v: l.d_v(),
        d_m1: l.d_m1(),
        d_m2: l.d_m2(),
        v1,
        v2: SparseMatrix::from_triplets(n, n, v2)?,
        pi_init: SparseMatrix::from_triplets(n, n, [(0, 0, one)])?,
        pi_acc: SparseMatrix::from_triplets(n, n, acc)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// A deterministic classical strategy as a prover strategy with one-dimensional
/// private spaces: prover 1 maps `|x, a> -> |x, a + alice[x] mod nA>`.
pub fn classical_strategy(game: &ClassicalGame, alice: &[usize], bob: &[usize]) -> Result<ProverStrategy> {
    game.validate()?;
    if alice.len() != game.n_x || bob.len() != game.n_y {
        return Err(Error::Input("strategy tables must cover every question".into()));
    }
    if alice.iter().any(|&a| a >= game.n_a) || bob.iter().any(|&b| b >= game.n_b) {
        return Err(Error::Input("strategy answers out of range".into()));
    }
    let shift = |f: &[usize], k: usize| {
        let d = f.len() * k;
        let mut u = ComplexMatrix::zeros(d, d);
        for (q, &o) in f.iter().enumerate() {
            for a in 0..k {
                u[(q * k + (a + o) % k, q * k + a)] = C64::new(1.0, 0.0);
            }
        }
        u
    };
    let l = Layout { n_x: game.n_x, n_y: game.n_y, n_a: game.n_a, n_b: game.n_b };
    Ok(ProverStrategy {
        d_p1: 1,
        d_p2: 1,
        u1: shift(alice, game.n_a),
        u2: shift(bob, game.n_b),
        psi: ComplexMatrix::basis(l.n(), 0),
    })
}

/// CHSH: uniform bits `x, y`; accept iff `a xor b = x and y`.
pub fn chsh_game() -> ClassicalGame {
    ClassicalGame::uniform((2, 2), (2, 2), |x, y, a, b| (a ^ b) == (x & y)).expect("valid game")
}

/// Alice's row entries for answer `a`: `(a0, a1, a0 xor a1)` with `a = a0 + 2 a1`.
pub(crate) fn magic_row_entries(a: usize) -> [usize; 3] {
    let (a0, a1) = (a & 1, a >> 1);
    [a0, a1, a0 ^ a1]
}

/// Bob's column entries for answer `b`: `(b0, b1, 1 xor b0 xor b1)`.
pub(crate) fn magic_column_entries(b: usize) -> [usize; 3] {
    let (b0, b1) = (b & 1, b >> 1);
    [b0, b1, 1 ^ b0 ^ b1]
}

/// Magic Square: Alice gets a row `r`, Bob a column `c`, each answers two free
/// bits (the third entry fixed by even row / odd column parity); accept iff both
/// assign the same value to the shared cell.
pub fn magic_square_game() -> ClassicalGame {
    ClassicalGame::uniform((3, 3), (4, 4), |r, c, a, b| {
        magic_row_entries(a)[c] == magic_column_entries(b)[r]
    })
    .expect("valid game")
}

pub fn chsh_spec() -> VerifierSpec {
    compile_game(&chsh_game()).expect("CHSH compiles within default limits")
}

pub fn magic_square_spec() -> Result<VerifierSpec> {
    compile_game(&magic_square_game())
}
