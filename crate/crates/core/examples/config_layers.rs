// Flags beat environment, environment beats the config file.

use std::path::Path;

use sizeprobe::config::{load_config, ConfigOverrides};
use sizeprobe::mutation::{ENDPOINT_ENV, MODEL_ENV};

pub fn run_example() -> sizeprobe::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/remote.toml");
    let env = |k: &str| match k {
        ENDPOINT_ENV => Some("http://10.0.0.5:8000/v1/chat/completions".to_string()),
        MODEL_ENV => None,
        _ => None,
    };
    let flags = ConfigOverrides { max_steps: Some(4), seed: Some(9), ..Default::default() };
    let cfg = load_config(Some(&path), &env, &flags)?;
    println!("endpoint  {}", cfg.provider.endpoint.as_deref().unwrap_or("-"));
    println!("model     {}", cfg.provider.model.as_deref().unwrap_or("-"));
    println!("max_steps {}  seed {}  campaign {}", cfg.max_steps, cfg.seed, cfg.campaign_id());
    for c in &cfg.compilers {
        println!("compiler  {} ({})", c.id, c.invocation);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
