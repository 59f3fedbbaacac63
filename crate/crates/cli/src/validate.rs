use std::path::PathBuf;

use clap::Args;
use kxp_core::explain::{counterexample, validate_candidate, CxpCatalog, ExplainOptions};
use kxp_core::io::{self, Num};
use kxp_core::model::validate_execution;
use kxp_core::{MaskRole, StepMask};
use serde_json::Value;

use crate::{Failure, ModelArgs, EXIT_INVALID};

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub exec: PathBuf,
    /// A mask document, or a result file with a `mask` field.
    #[arg(long)]
    pub mask: PathBuf,
    /// Decide by the hitting-set test against this catalog instead of a query.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

fn read_mask(path: &std::path::Path) -> Result<StepMask, Failure> {
    let value: Value = io::read_json(path)?;
    let inner = match value.get("mask") {
        Some(Value::Null) => return Err(Failure::input(format!("{}: the run has no mask", path.display()))),
        Some(m) => m.clone(),
        None => value,
    };
    Ok(serde_json::from_value(inner)?)
}

pub fn run(a: &ValidateArgs) -> Result<u8, Failure> {
    let sys = io::load_system(&a.model.system)?;
    let net = io::load_network(&a.model.network)?;
    let exec = io::load_execution(&a.exec)?;
    validate_execution(&sys, &net, &exec).map_err(|e| Failure::input(e.to_string()))?;
    let mask = read_mask(&a.mask)?;
    mask.validate(exec.len(), sys.feature_count()).map_err(|e| Failure::input(e.to_string()))?;
    let opts = ExplainOptions { semantics: a.model.semantics.into(), ..Default::default() };
    let pinned = match mask.role {
        MaskRole::Explanation => mask.clone(),
        MaskRole::Contrastive => mask.complement(sys.feature_count()),
    };

    if let Some(path) = &a.catalog {
        let catalog: CxpCatalog = io::read_json(path)?;
        let (valid, _) = validate_candidate(&sys, &net, &exec, &pinned, Some(&catalog), &opts)?;
        if valid {
            println!("valid: hits all {} catalogued contrastive examples", catalog.len());
            return Ok(0);
        }
        let missed = catalog.members.iter().find(|c| !c.intersects(&pinned)).expect("some member is missed");
        println!("invalid: misses contrastive example {missed}");
        return Ok(EXIT_INVALID);
    }

    match counterexample(&sys, &net, &exec, &pinned, &opts)? {
        None => {
            println!("valid");
            Ok(0)
        }
        Some(states) => {
            let doc: Vec<Vec<Num>> = states.into_iter().map(|s| s.into_iter().map(Num).collect()).collect();
            println!("invalid: witness {}", serde_json::to_string(&serde_json::json!({ "states": doc }))?);
            Ok(EXIT_INVALID)
        }
    }
}
