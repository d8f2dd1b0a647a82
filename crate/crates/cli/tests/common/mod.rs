#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use firedrill_core::agents::Agent;
use firedrill_core::geometry::Vec2;
use firedrill_core::scenario::Scenario;
use firedrill_core::session::InputSource;
use firedrill_core::sim::{InputSample, SimState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_firedrill"))
}

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> PathBuf {
    repo_root().join("fixtures").join(name)
}

pub fn firedrill(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A `firedrill serve` child process; killed on drop.
pub struct Server {
    pub child: Child,
    pub url: String,
    pub banner: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn spawn_server(extra: &[&str]) -> Result<Server, String> {
    let mut child = bin()
        .arg("serve")
        .args(extra)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .map_err(|e| e.to_string())?;
    let Some(rest) = line.strip_prefix("listening on ") else {
        let _ = child.kill();
        return Err(format!("no banner, got {line:?}"));
    };
    let url = rest.split_whitespace().next().unwrap().to_owned();
    Ok(Server {
        child,
        url,
        banner: line,
    })
}

/// A trainee that mostly does the right thing but fumbles: random aim,
/// stray steps, random selections and trigger flicks.
pub struct Fumbler {
    rng: ChaCha8Rng,
}

impl Fumbler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl InputSource for Fumbler {
    fn next_input(&mut self, state: &SimState, s: &Scenario) -> Option<InputSample> {
        let mut x = Agent::Perfect.decide(state, s);
        let r = &mut self.rng;
        if r.gen_bool(0.3) {
            x.aim = Vec2::from_angle(r.gen_range(-3.2..3.2));
        }
        if r.gen_bool(0.1) {
            x.movement = if r.gen_bool(0.3) {
                Vec2::ZERO
            } else {
                Vec2::from_angle(r.gen_range(-3.2..3.2))
            };
        }
        if r.gen_bool(0.05) {
            let n = s.extinguishers.len();
            let i = r.gen_range(0..=n);
            x.select = Some(
                s.extinguishers
                    .get(i)
                    .map_or("nope".into(), |e| e.id.clone()),
            );
        }
        if r.gen_bool(0.2) {
            x.trigger = !x.trigger;
        }
        Some(x)
    }
}
