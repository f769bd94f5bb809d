//! Truth at a world.
//!
//! Truth of labeled pairs does not depend on the formula being asked about,
//! so it is tabulated once per model. Delegatable sattestor truth can refer
//! to itself through other SATAs; it is the greatest fixed point, computed
//! by starting from every sattestor fact and removing pairs whose
//! delegation conditions fail until nothing changes.

use crate::labels::LabelKind;
use crate::lang::{BdLPair, Form, Trustable};

use super::{KripkeModel, Pair, SemanticsError};

/// Visiting order for the fixed-point sweep. The result does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GfpOrder {
    #[default]
    Forward,
    Reverse,
}

/// Truth tables of every labeled pair at every world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation<'m> {
    model: &'m KripkeModel,
    /// `wk[i][j]`: label `i` is weakly narrower than label `j` at all worlds.
    wk: Vec<Vec<bool>>,
    bound: Vec<Vec<bool>>,
    /// `[world][name][label]`
    plain: Vec<Vec<Vec<bool>>>,
    satt: Vec<Vec<Vec<bool>>>,
    sattdel: Vec<Vec<Vec<bool>>>,
    sweeps: usize,
}

impl<'m> Valuation<'m> {
    pub fn new(model: &'m KripkeModel) -> Self {
        Self::with_order(model, GfpOrder::Forward)
    }

    pub fn with_order(model: &'m KripkeModel, order: GfpOrder) -> Self {
        let nl = model.labels.len();
        let nn = model.names.len();
        let wk: Vec<Vec<bool>> = (0..nl)
            .map(|i| {
                (0..nl)
                    .map(|j| {
                        let (narrow, broad) = (&model.labels[i], &model.labels[j]);
                        broad.weakly_broadens(narrow)
                            && (i == j
                                || model
                                    .worlds
                                    .iter()
                                    .all(|w| w.members[i].is_subset(&w.members[j])))
                    })
                    .collect()
            })
            .collect();

        let bound: Vec<Vec<bool>> = model
            .worlds
            .iter()
            .map(|w| {
                (0..nn)
                    .map(|n| {
                        let me = &model.names[n];
                        w.bind1[n].iter().any(|&m| model.names[m].domain == me.domain)
                            && w.bind2[n].iter().any(|&m| model.names[m].onion == me.onion)
                    })
                    .collect()
            })
            .collect();

        let plain: Vec<Vec<Vec<bool>>> = model
            .worlds
            .iter()
            .enumerate()
            .map(|(wi, w)| {
                (0..nn)
                    .map(|n| {
                        (0..nl)
                            .map(|l| bound[wi][n] && (l == 0 || w.members[l].contains(&n)))
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let satt: Vec<Vec<Vec<bool>>> = model
            .worlds
            .iter()
            .enumerate()
            .map(|(wi, w)| {
                (0..nn)
                    .map(|n| {
                        (0..nl)
                            .map(|l| {
                                bound[wi][n]
                                    && w.utterances[n].iter().all(|p1| {
                                        // a sattestation of a plain label at or below l,
                                        // answered by the sattestee's own claim at or
                                        // below that, must be true
                                        p1.kind != LabelKind::Plain
                                            || !wk[p1.label][l]
                                            || plain[wi][p1.id][p1.label]
                                            || !w.utterances[p1.id].iter().any(|p2| {
                                                p2.kind == LabelKind::Plain
                                                    && p2.id == p1.id
                                                    && wk[p2.label][p1.label]
                                            })
                                    })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let mut sweeps = 0;
        let sattdel = (0..model.worlds.len())
            .map(|wi| {
                let (table, n) = sattdel_gfp(model, wi, &wk, &satt[wi], order);
                sweeps += n;
                table
            })
            .collect();

        Valuation {
            model,
            wk,
            bound,
            plain,
            satt,
            sattdel,
            sweeps,
        }
    }

    pub fn model(&self) -> &KripkeModel {
        self.model
    }

    /// Total fixed-point sweeps over all worlds, the last one per world
    /// being the one that changed nothing.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn pair_holds(&self, world: usize, p: Pair) -> bool {
        match p.kind {
            LabelKind::Plain => self.plain[world][p.id][p.label],
            LabelKind::Satt => self.satt[world][p.id][p.label],
            LabelKind::SattDel => self.sattdel[world][p.id][p.label],
        }
    }

    pub fn is_bound(&self, world: usize, id: usize) -> bool {
        self.bound[world][id]
    }

    pub fn wk(&self, narrower: usize, broader: usize) -> bool {
        self.wk[narrower][broader]
    }

    fn says(&self, world: usize, speaker: usize, body: Pair) -> bool {
        let m = self.model;
        let companion = (body.kind == LabelKind::SattDel).then_some(Pair {
            kind: LabelKind::Satt,
            ..body
        });
        (0..m.principals.len()).all(|q| {
            m.access[q][world].iter().all(|&v| {
                let said = &m.worlds[v].utterances[speaker];
                said.contains(&body) && companion.is_none_or(|c| said.contains(&c))
            })
        })
    }

    fn pair_of(&self, pair: &BdLPair) -> Result<Pair, SemanticsError> {
        self.model.pair_index(pair)
    }

    pub fn satisfies(&self, world: usize, f: &Form) -> Result<bool, SemanticsError> {
        let m = self.model;
        if world >= m.worlds.len() {
            return Err(SemanticsError::UnknownWorld(world));
        }
        Ok(match f {
            Form::BdL(pair) => self.pair_holds(world, self.pair_of(pair)?),
            Form::Says { speaker, body } => self.says(world, m.name_index(speaker)?, self.pair_of(body)?),
            Form::Trusts { who, what } => {
                let p = m.principal_index(who)?;
                let inner = match what {
                    Trustable::BdL(pair) => Form::BdL(pair.clone()),
                    Trustable::Says { speaker, body } => Form::says(speaker.clone(), body.clone()),
                };
                for &v in &m.access[p][world] {
                    if !self.satisfies(v, &inner)? {
                        return Ok(false);
                    }
                }
                true
            }
            Form::WkOrder { narrower, broader } => {
                self.wk[m.label_index(narrower)?][m.label_index(broader)?]
            }
            Form::Implies(a, b) => !self.satisfies(world, a)? || self.satisfies(world, b)?,
            Form::And(a, b) => self.satisfies(world, a)? && self.satisfies(world, b)?,
        })
    }
}

/// Greatest set of (name, label) pairs at one world that are sattestor
/// facts and whose delegation obligations stay inside the set.
fn sattdel_gfp(
    model: &KripkeModel,
    world: usize,
    wk: &[Vec<bool>],
    satt: &[Vec<bool>],
    order: GfpOrder,
) -> (Vec<Vec<bool>>, usize) {
    let w = &model.worlds[world];
    let mut s: Vec<Vec<bool>> = satt.to_vec();
    let mut cells: Vec<(usize, usize)> = (0..model.names.len())
        .flat_map(|n| (0..model.labels.len()).map(move |l| (n, l)))
        .collect();
    if order == GfpOrder::Reverse {
        cells.reverse();
    }
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut changed = false;
        for &(n, l) in &cells {
            if !s[n][l] {
                continue;
            }
            let violated = w.utterances[n].iter().any(|p1| {
                if p1.kind == LabelKind::Plain || !wk[p1.label][l] {
                    return false;
                }
                w.utterances[p1.id].iter().any(|p2| {
                    if !wk[p2.label][p1.label] {
                        return false;
                    }
                    match (p1.kind, p2.kind) {
                        (LabelKind::SattDel, LabelKind::Satt) => !s[p1.id][p2.label],
                        (LabelKind::Satt, LabelKind::Plain) => !satt[p1.id][p2.label],
                        _ => false,
                    }
                })
            });
            if violated {
                s[n][l] = false;
                changed = true;
            }
        }
        if !changed {
            return (s, sweeps);
        }
    }
}

pub fn satisfies(model: &KripkeModel, world: usize, f: &Form) -> Result<bool, SemanticsError> {
    Valuation::new(model).satisfies(world, f)
}

/// True iff `f` holds at every world of `model` where all of `assumptions` hold.
pub fn semantic_entails<'a, I>(model: &KripkeModel, assumptions: I, f: &Form) -> Result<bool, SemanticsError>
where
    I: IntoIterator<Item = &'a Form>,
{
    let v = Valuation::new(model);
    let assumptions: Vec<&Form> = assumptions.into_iter().collect();
    for w in 0..model.world_count() {
        let mut all = true;
        for a in &assumptions {
            if !v.satisfies(w, a)? {
                all = false;
                break;
            }
        }
        if all && !v.satisfies(w, f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Label;
    use crate::lang::{Principal, SataId};

    use crate::semantics::ModelBuilder;

    fn one(label_a: bool) -> KripkeModel {
        let mut b = ModelBuilder::new(
            vec![SataId::new("d", "o")],
            vec![Label::parse("a").unwrap()],
            vec![Principal::client("P")],
            1,
        );
        b.self_bind(0, 0);
        if label_a {
            b.member(0, 1, 0);
        }
        b.build().unwrap()
    }

    fn f(s: &str) -> Form {
        Form::parse(s).unwrap()
    }

    #[test]
    fn smallest_models() {
        assert!(satisfies(&one(true), 0, &f("(d, o, a)")).unwrap());
        assert!(!satisfies(&one(false), 0, &f("(d, o, a)")).unwrap());
        assert!(satisfies(&one(false), 0, &f("(d, o)")).unwrap());
        assert!(satisfies(&one(true), 0, &f("P trusts (d, o, a)")).unwrap());
    }

    #[test]
    fn unknowns_are_errors() {
        let m = one(true);
        assert!(matches!(satisfies(&m, 0, &f("(e, o, a)")), Err(SemanticsError::UnknownName(_))));
        assert!(matches!(satisfies(&m, 0, &f("(d, o, zz)")), Err(SemanticsError::UnknownLabel(_))));
        assert!(matches!(
            satisfies(&m, 0, &f("Q trusts (d, o)")),
            Err(SemanticsError::UnknownPrincipal(_))
        ));
    }

    #[test]
    fn vacuous_and_tautologous_entailment() {
        let m = one(false);
        let taut = f("(d, o, a) -> (d, o, a)");
        assert!(semantic_entails(&m, [], &taut).unwrap());
        let never = f("(d, o, a)");
        assert!(semantic_entails(&m, [&never], &f("(d, o, a) & (d, o)")).unwrap());
    }
}
