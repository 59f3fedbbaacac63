use std::fmt::{self, Write as _};

use crate::model::{Atom, FeatureDomain, Network};
use crate::rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    /// `None` means unbounded.
    pub domain: Option<FeatureDomain>,
}

/// One copy of a network wired between declared variables.
#[derive(Debug, Clone)]
pub struct NetworkCopy<'n> {
    pub net: &'n Network,
    pub label: String,
    pub inputs: Vec<VarId>,
    /// Post-activation variables of every non-final layer.
    pub hidden: Vec<Vec<VarId>>,
    pub outputs: Vec<VarId>,
}

/// At least one case must hold; a case is a conjunction of atoms.
#[derive(Debug, Clone)]
pub struct Disjunction {
    pub label: String,
    pub cases: Vec<Vec<Atom<VarId>>>,
}

/// A feasibility question: is there an assignment to all variables that
/// satisfies every atom, at least one case of every disjunction, and the exact
/// semantics of every network copy?
#[derive(Debug, Clone, Default)]
pub struct Query<'n> {
    vars: Vec<VarDecl>,
    networks: Vec<NetworkCopy<'n>>,
    atoms: Vec<Atom<VarId>>,
    disjunctions: Vec<Disjunction>,
}

impl<'n> Query<'n> {
    pub fn new() -> Self {
        Query { vars: Vec::new(), networks: Vec::new(), atoms: Vec::new(), disjunctions: Vec::new() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, domain: Option<FeatureDomain>) -> VarId {
        self.vars.push(VarDecl { name: name.into(), domain });
        VarId(self.vars.len() - 1)
    }

    /// Declares one variable per domain, named `{prefix}_{index}`.
    pub fn add_block(&mut self, prefix: &str, domains: &[FeatureDomain]) -> Vec<VarId> {
        domains
            .iter()
            .enumerate()
            .map(|(i, d)| self.add_var(format!("{prefix}_{i}"), Some(d.clone())))
            .collect()
    }

    /// Wires a copy of `net` reading `inputs`; returns the output variables.
    pub fn add_network(&mut self, net: &'n Network, inputs: &[VarId], label: impl Into<String>) -> Vec<VarId> {
        let label = label.into();
        assert_eq!(inputs.len(), net.input_width(), "network input width");
        let hidden: Vec<Vec<VarId>> = net
            .hidden_widths()
            .iter()
            .enumerate()
            .map(|(l, &w)| (0..w).map(|u| self.add_var(format!("{label}_h{l}_{u}"), None)).collect())
            .collect();
        let outputs: Vec<VarId> = (0..net.output_width())
            .map(|o| self.add_var(format!("{label}_y{o}"), None))
            .collect();
        self.networks.push(NetworkCopy {
            net,
            label,
            inputs: inputs.to_vec(),
            hidden,
            outputs: outputs.clone(),
        });
        outputs
    }

    pub fn assert(&mut self, atom: Atom<VarId>) {
        self.atoms.push(atom);
    }

    pub fn assert_any(&mut self, label: impl Into<String>, cases: Vec<Vec<Atom<VarId>>>) {
        self.disjunctions.push(Disjunction { label: label.into(), cases });
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn networks(&self) -> &[NetworkCopy<'n>] {
        &self.networks
    }

    pub fn network_count(&self) -> usize {
        self.networks.len()
    }

    pub fn atoms(&self) -> &[Atom<VarId>] {
        &self.atoms
    }

    pub fn disjunctions(&self) -> &[Disjunction] {
        &self.disjunctions
    }

    /// Checks that every referenced variable exists.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.vars.len();
        let check = |atom: &Atom<VarId>| -> Result<(), String> {
            atom.validate().map_err(|e| e.to_string())?;
            match atom.expr.vars().find(|v| v.0 >= n) {
                Some(v) => Err(format!("atom references undeclared variable {v}")),
                None => Ok(()),
            }
        };
        for atom in &self.atoms {
            check(atom)?;
        }
        for d in &self.disjunctions {
            if d.cases.is_empty() {
                return Err(format!("disjunction {} has no cases", d.label));
            }
            for atom in d.cases.iter().flatten() {
                check(atom)?;
            }
        }
        for copy in &self.networks {
            let all = copy.inputs.iter().chain(copy.hidden.iter().flatten()).chain(&copy.outputs);
            if let Some(v) = all.into_iter().find(|v| v.0 >= n) {
                return Err(format!("network {} references undeclared variable {v}", copy.label));
            }
            if copy.inputs.len() != copy.net.input_width() {
                return Err(format!("network {} input width mismatch", copy.label));
            }
        }
        if let Some(d) = self.vars.iter().filter_map(|v| v.domain.as_ref()).find(|d| d.validate().is_err()) {
            return Err(format!("invalid domain {d:?}"));
        }
        Ok(())
    }

    fn named(&self, atom: &Atom<VarId>) -> String {
        atom.map(|v| Named(self.vars[v.0].name.clone())).to_string()
    }

    /// Textual dump, one declaration or atom per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in &self.vars {
            match &v.domain {
                Some(FeatureDomain::Finite(values)) => {
                    let vals: Vec<_> = values.iter().map(rational::to_text).collect();
                    let _ = writeln!(out, "var {} in {{{}}}", v.name, vals.join(", "));
                }
                Some(FeatureDomain::Interval(lo, hi)) => {
                    let _ = writeln!(
                        out,
                        "var {} in [{}, {}]",
                        v.name,
                        rational::to_text(lo),
                        rational::to_text(hi)
                    );
                }
                None => {
                    let _ = writeln!(out, "var {}", v.name);
                }
            }
        }
        for copy in &self.networks {
            let ins: Vec<_> = copy.inputs.iter().map(|v| self.vars[v.0].name.as_str()).collect();
            let outs: Vec<_> = copy.outputs.iter().map(|v| self.vars[v.0].name.as_str()).collect();
            let _ = writeln!(out, "net {}: ({}) -> ({})", copy.label, ins.join(", "), outs.join(", "));
        }
        for atom in &self.atoms {
            let _ = writeln!(out, "assert {}", self.named(atom));
        }
        for d in &self.disjunctions {
            let _ = writeln!(out, "any {}", d.label);
            for (i, case) in d.cases.iter().enumerate() {
                for atom in case {
                    let _ = writeln!(out, "  case {i}: {}", self.named(atom));
                }
            }
        }
        out
    }
}

#[derive(Clone, PartialEq)]
struct Named(String);

impl fmt::Display for Named {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
