//! JSON documents for networks, systems and executions.
//!
//! Every rational is written as a string, `"3"`, `"-1/12"` or `"0.25"`;
//! JSON integers are accepted on input, binary floats are rejected.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::{
    Atom, Comparator, ConstraintSet, Execution, FeatureDomain, Layer, LinExpr, ModelError, Network, ReactiveSystem,
    Relation, StateRef,
};
use crate::rational::{self, Rational};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Schema(String),
}

/// A rational in a JSON document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Num(pub Rational);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational::to_text(&self.0))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => rational::parse(&t).map(Num).map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(Num(rational::int(i))),
        }
    }
}

fn nums(v: &[Rational]) -> Vec<Num> {
    v.iter().cloned().map(Num).collect()
}

fn rats(v: Vec<Num>) -> Vec<Rational> {
    v.into_iter().map(|n| n.0).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerDoc {
    pub weights: Vec<Vec<Num>>,
    pub bias: Vec<Num>,
    pub relu: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub layers: Vec<LayerDoc>,
}

impl From<&Network> for NetworkDoc {
    fn from(net: &Network) -> Self {
        NetworkDoc {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerDoc {
                    weights: l.weights.iter().map(|r| nums(r)).collect(),
                    bias: nums(&l.bias),
                    relu: l.relu,
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = IoError;

    fn try_from(doc: NetworkDoc) -> Result<Self, IoError> {
        let layers = doc
            .layers
            .into_iter()
            .map(|l| Layer::new(l.weights.into_iter().map(rats).collect(), rats(l.bias), l.relu))
            .collect();
        Ok(Network::new(layers)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainDoc {
    Values { values: Vec<Num> },
    Interval { interval: [Num; 2] },
}

impl From<&FeatureDomain> for DomainDoc {
    fn from(d: &FeatureDomain) -> Self {
        match d.values() {
            Some(v) => DomainDoc::Values { values: nums(v) },
            None => DomainDoc::Interval { interval: [Num(d.lower().clone()), Num(d.upper().clone())] },
        }
    }
}

impl TryFrom<DomainDoc> for FeatureDomain {
    type Error = IoError;

    fn try_from(doc: DomainDoc) -> Result<Self, IoError> {
        Ok(match doc {
            DomainDoc::Values { values } => FeatureDomain::finite(rats(values))?,
            DomainDoc::Interval { interval: [lo, hi] } => FeatureDomain::interval(lo.0, hi.0)?,
        })
    }
}

/// `terms` are `[ref, coefficient]` pairs with refs `x3` (current state) or
/// `x3'` (successor). Either `op` and `rhs` or `in` is present.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomDoc {
    pub terms: Vec<(String, Num)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Num>,
    #[serde(default, rename = "in", skip_serializing_if = "Option::is_none")]
    pub member: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl From<&Atom<StateRef>> for AtomDoc {
    fn from(a: &Atom<StateRef>) -> Self {
        let terms = a.expr.terms.iter().map(|(r, c)| (r.to_string(), Num(c.clone()))).collect();
        let (op, rhs, member) = match &a.relation {
            Relation::Cmp(cmp, rhs) => (Some(cmp.symbol().to_string()), Some(Num(rhs.clone())), None),
            Relation::In(values) => (None, None, Some(nums(values))),
        };
        AtomDoc { terms, op, rhs, member, label: a.label.clone() }
    }
}

impl TryFrom<AtomDoc> for Atom<StateRef> {
    type Error = IoError;

    fn try_from(doc: AtomDoc) -> Result<Self, IoError> {
        let mut expr = LinExpr::new();
        for (r, c) in doc.terms {
            let r = StateRef::parse(&r).ok_or_else(|| IoError::Schema(format!("bad state reference {r:?}")))?;
            expr.add_term(r, c.0);
        }
        let atom = match (doc.op, doc.rhs, doc.member) {
            (Some(op), Some(rhs), None) => {
                let cmp = Comparator::from_symbol(&op).ok_or_else(|| IoError::Schema(format!("bad operator {op:?}")))?;
                Atom::cmp(expr, cmp, rhs.0)
            }
            (None, None, Some(values)) => Atom::member(expr, rats(values)),
            _ => return Err(IoError::Schema("an atom needs either op and rhs, or in".into())),
        };
        atom.validate()?;
        Ok(match doc.label {
            Some(l) => atom.labelled(l),
            None => atom,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDoc {
    pub m: usize,
    pub domains: Vec<DomainDoc>,
    pub actions: Vec<String>,
    #[serde(default)]
    pub initial: Vec<AtomDoc>,
    pub transitions: Vec<Vec<AtomDoc>>,
}

impl From<&ReactiveSystem> for SystemDoc {
    fn from(sys: &ReactiveSystem) -> Self {
        SystemDoc {
            m: sys.feature_count(),
            domains: sys.domains().iter().map(DomainDoc::from).collect(),
            actions: sys.actions().to_vec(),
            initial: sys.initial().atoms.iter().map(AtomDoc::from).collect(),
            transitions: sys.transitions().iter().map(|t| t.atoms.iter().map(AtomDoc::from).collect()).collect(),
        }
    }
}

impl TryFrom<SystemDoc> for ReactiveSystem {
    type Error = IoError;

    fn try_from(doc: SystemDoc) -> Result<Self, IoError> {
        if doc.domains.len() != doc.m {
            return Err(IoError::Schema(format!("m = {} but {} domains", doc.m, doc.domains.len())));
        }
        let domains = doc.domains.into_iter().map(FeatureDomain::try_from).collect::<Result<_, _>>()?;
        let atoms = |v: Vec<AtomDoc>| -> Result<ConstraintSet<StateRef>, IoError> {
            Ok(ConstraintSet::new(v.into_iter().map(Atom::try_from).collect::<Result<_, _>>()?))
        };
        let initial = atoms(doc.initial)?;
        let transitions = doc.transitions.into_iter().map(atoms).collect::<Result<_, _>>()?;
        Ok(ReactiveSystem::new(domains, doc.actions, initial, transitions)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecutionDoc {
    pub states: Vec<Vec<Num>>,
    pub actions: Vec<usize>,
}

impl From<&Execution> for ExecutionDoc {
    fn from(e: &Execution) -> Self {
        ExecutionDoc { states: e.states.iter().map(|s| nums(s)).collect(), actions: e.actions.clone() }
    }
}

impl TryFrom<ExecutionDoc> for Execution {
    type Error = IoError;

    fn try_from(doc: ExecutionDoc) -> Result<Self, IoError> {
        Ok(Execution::new(doc.states.into_iter().map(rats).collect(), doc.actions)?)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

pub fn load_network(path: &Path) -> Result<Network, IoError> {
    Network::try_from(read_json::<NetworkDoc>(path)?)
}

pub fn load_system(path: &Path) -> Result<ReactiveSystem, IoError> {
    ReactiveSystem::try_from(read_json::<SystemDoc>(path)?)
}

pub fn load_execution(path: &Path) -> Result<Execution, IoError> {
    Execution::try_from(read_json::<ExecutionDoc>(path)?)
}

pub fn network_json(net: &Network) -> String {
    serde_json::to_string_pretty(&NetworkDoc::from(net)).expect("network serializes")
}

pub fn system_json(sys: &ReactiveSystem) -> String {
    serde_json::to_string_pretty(&SystemDoc::from(sys)).expect("system serializes")
}

pub fn execution_json(exec: &Execution) -> String {
    serde_json::to_string_pretty(&ExecutionDoc::from(exec)).expect("execution serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{self, fixtures, AgentKind};

    #[test]
    fn round_trips() {
        let spec = envs::GridWorldSpec::small();
        let sys = envs::gridworld_system(&spec);
        let back: ReactiveSystem = serde_json::from_str::<SystemDoc>(&system_json(&sys)).unwrap().try_into().unwrap();
        assert_eq!(back, sys);
        let tb = envs::turtlebot_system();
        let back: ReactiveSystem = serde_json::from_str::<SystemDoc>(&system_json(&tb)).unwrap().try_into().unwrap();
        assert_eq!(back, tb);
        let net = envs::make_fixture_agent(AgentKind::TurtleBot, 3);
        let back: Network = serde_json::from_str::<NetworkDoc>(&network_json(&net)).unwrap().try_into().unwrap();
        assert_eq!(back, net);
        let (_, _, exec) = fixtures::copy_example();
        let back: Execution = serde_json::from_str::<ExecutionDoc>(&execution_json(&exec)).unwrap().try_into().unwrap();
        assert_eq!(back, exec);
    }

    #[test]
    fn rationals_are_strings() {
        let doc: ExecutionDoc = serde_json::from_str(r#"{"states": [["0.5", "-1/3", 2]], "actions": [0]}"#).unwrap();
        let exec = Execution::try_from(doc).unwrap();
        assert_eq!(exec.states[0], vec![rational::frac(1, 2), rational::frac(-1, 3), rational::int(2)]);
        assert!(serde_json::from_str::<ExecutionDoc>(r#"{"states": [[0.5]], "actions": [0]}"#).is_err());
        assert!(execution_json(&exec).contains("\"-1/3\""));
    }

    #[test]
    fn malformed_atoms_are_rejected() {
        let bad = r#"{"terms": [["y1", "1"]], "op": "=", "rhs": "0"}"#;
        assert!(Atom::try_from(serde_json::from_str::<AtomDoc>(bad).unwrap()).is_err());
        let bad = r#"{"terms": [["x1", "1"]], "op": "!=", "rhs": "0"}"#;
        assert!(Atom::try_from(serde_json::from_str::<AtomDoc>(bad).unwrap()).is_err());
        let bad = r#"{"terms": [["x1", "1"]]}"#;
        assert!(Atom::try_from(serde_json::from_str::<AtomDoc>(bad).unwrap()).is_err());
    }
}
