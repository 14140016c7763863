use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use causebound::{Role, Schema, VariableSpec};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphFamily {
    /// Covariates `Z_1..Z_m` point into both `X` and `Y`.
    Nondescendant,
    /// Back-door covariates plus a mediator `X → W → Y`.
    Mediator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cardinalities {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    /// Shared by every covariate.
    pub z: usize,
}

impl Cardinalities {
    pub const BINARY: Cardinalities = Cardinalities { x: 2, y: 2, w: 2, z: 2 };
}

impl Default for Cardinalities {
    fn default() -> Self {
        Self::BINARY
    }
}

/// A structural model given by response-function distributions.
///
/// Every conditional table is indexed by the covariate cell (row-major over
/// `Z_1..Z_m`, first covariate most significant). A response function
/// `f: A → B` is stored as the index `Σ_a f(a)·|B|^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmSpec {
    pub family: GraphFamily,
    pub nx: usize,
    pub ny: usize,
    /// Mediator cardinality; unused outside the mediator family.
    pub nw: usize,
    pub z_cards: Vec<usize>,
    pub covariate_priors: Vec<Vec<f64>>,
    /// `P(X | z)`.
    pub treatment_cpt: Vec<Vec<f64>>,
    /// Distribution over `X → Y` functions given `z`.
    pub outcome_response: Vec<Vec<f64>>,
    /// Distribution over `X → W` functions given `z`.
    pub mediator_response: Vec<Vec<f64>>,
    /// Distribution over `W → Y` functions given `z`.
    pub outcome_given_mediator: Vec<Vec<f64>>,
}

/// Output of response function `r` at input `arg`.
pub fn response_value(r: usize, arg: usize, out_card: usize) -> usize {
    (r / out_card.pow(arg as u32)) % out_card
}

impl ScmSpec {
    pub fn m(&self) -> usize {
        self.z_cards.len()
    }

    pub fn z_cells(&self) -> usize {
        self.z_cards.iter().product()
    }

    pub fn z_assignment(&self, mut cell: usize) -> Vec<usize> {
        let mut out = vec![0; self.z_cards.len()];
        for (slot, &c) in out.iter_mut().zip(&self.z_cards).rev() {
            *slot = cell % c;
            cell /= c;
        }
        out
    }

    /// `P(z)` under mutually independent covariates.
    pub fn p_z(&self, cell: usize) -> f64 {
        self.z_assignment(cell)
            .iter()
            .zip(&self.covariate_priors)
            .map(|(&v, prior)| prior[v])
            .product()
    }

    pub fn schema(&self) -> Schema {
        let role = match self.family {
            GraphFamily::Nondescendant => Role::NondescendantCovariate,
            GraphFamily::Mediator => Role::BackdoorCovariate,
        };
        let mut vars = vec![
            VariableSpec::new("X", self.nx, Role::Treatment),
            VariableSpec::new("Y", self.ny, Role::Outcome),
        ];
        vars.extend(
            self.z_cards
                .iter()
                .enumerate()
                .map(|(i, &c)| VariableSpec::new(format!("Z{}", i + 1), c, role)),
        );
        if self.family == GraphFamily::Mediator {
            vars.push(VariableSpec::new("W", self.nw, Role::Mediator));
        }
        Schema::new(vars).expect("generated schema is well formed")
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let zc = self.z_cells();
        let check = |name: &str, rows: &[Vec<f64>], count: usize, width: usize| -> Result<(), LabError> {
            if rows.len() != count {
                return Err(LabError::InvalidArgument(format!(
                    "{name}: {} rows, expected {count}",
                    rows.len()
                )));
            }
            for row in rows {
                let s: f64 = row.iter().sum();
                if row.len() != width || (s - 1.0).abs() > 1e-12 || row.iter().any(|&p| p < 0.0) {
                    return Err(LabError::InvalidArgument(format!(
                        "{name}: row is not a distribution over {width}"
                    )));
                }
            }
            Ok(())
        };
        for (i, prior) in self.covariate_priors.iter().enumerate() {
            check(
                &format!("P(Z{})", i + 1),
                std::slice::from_ref(prior),
                1,
                self.z_cards[i],
            )?;
        }
        check("P(X | z)", &self.treatment_cpt, zc, self.nx)?;
        match self.family {
            GraphFamily::Nondescendant => {
                check(
                    "outcome response",
                    &self.outcome_response,
                    zc,
                    self.ny.pow(self.nx as u32),
                )?;
            }
            GraphFamily::Mediator => {
                check(
                    "mediator response",
                    &self.mediator_response,
                    zc,
                    self.nw.pow(self.nx as u32),
                )?;
                check(
                    "outcome-given-mediator response",
                    &self.outcome_given_mediator,
                    zc,
                    self.ny.pow(self.nw as u32),
                )?;
            }
        }
        Ok(())
    }
}

/// A flat-Dirichlet draw: normalized unit exponentials.
fn simplex_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|p| *p /= s);
    v
}

/// Draws every conditional row independently and uniformly from its simplex.
pub fn sample_scm(family: GraphFamily, cards: Cardinalities, m: usize, seed: u64) -> ScmSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z_cards = vec![cards.z; m];
    let zc: usize = z_cards.iter().product();
    let covariate_priors = z_cards.iter().map(|&c| simplex_row(&mut rng, c)).collect();
    let treatment_cpt = (0..zc).map(|_| simplex_row(&mut rng, cards.x)).collect();
    let mut rows = |k: usize| (0..zc).map(|_| simplex_row(&mut rng, k)).collect::<Vec<_>>();
    let (outcome_response, mediator_response, outcome_given_mediator) = match family {
        GraphFamily::Nondescendant => (rows(cards.y.pow(cards.x as u32)), Vec::new(), Vec::new()),
        GraphFamily::Mediator => {
            let w = rows(cards.w.pow(cards.x as u32));
            let y = rows(cards.y.pow(cards.w as u32));
            (Vec::new(), w, y)
        }
    };
    ScmSpec {
        family,
        nx: cards.x,
        ny: cards.y,
        nw: cards.w,
        z_cards,
        covariate_priors,
        treatment_cpt,
        outcome_response,
        mediator_response,
        outcome_given_mediator,
    }
}

/// One response-function configuration with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub p: f64,
    pub z: Vec<usize>,
    pub x: usize,
    /// `Y_{x_t}` for every arm.
    pub y_pot: Vec<usize>,
    /// `W_{x_t}` for every arm (mediator family).
    pub w_pot: Option<Vec<usize>>,
}

impl Unit {
    pub fn y(&self) -> usize {
        self.y_pot[self.x]
    }

    pub fn w(&self) -> Option<usize> {
        self.w_pot.as_ref().map(|w| w[self.x])
    }
}

/// Every configuration `(z, x, responses)` with positive probability.
pub fn units(scm: &ScmSpec) -> Vec<Unit> {
    let mut out = Vec::new();
    for zc in 0..scm.z_cells() {
        let pz = scm.p_z(zc);
        let z = scm.z_assignment(zc);
        for x in 0..scm.nx {
            let px = pz * scm.treatment_cpt[zc][x];
            if px == 0.0 {
                continue;
            }
            match scm.family {
                GraphFamily::Nondescendant => {
                    for (r, &pr) in scm.outcome_response[zc].iter().enumerate() {
                        if pr == 0.0 {
                            continue;
                        }
                        out.push(Unit {
                            p: px * pr,
                            z: z.clone(),
                            x,
                            y_pot: (0..scm.nx).map(|t| response_value(r, t, scm.ny)).collect(),
                            w_pot: None,
                        });
                    }
                }
                GraphFamily::Mediator => {
                    for (rw, &pw) in scm.mediator_response[zc].iter().enumerate() {
                        for (ry, &py) in scm.outcome_given_mediator[zc].iter().enumerate() {
                            if pw == 0.0 || py == 0.0 {
                                continue;
                            }
                            let w_pot: Vec<usize> = (0..scm.nx).map(|t| response_value(rw, t, scm.nw)).collect();
                            out.push(Unit {
                                p: px * pw * py,
                                z: z.clone(),
                                x,
                                y_pot: w_pot.iter().map(|&w| response_value(ry, w, scm.ny)).collect(),
                                w_pot: Some(w_pot),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}
