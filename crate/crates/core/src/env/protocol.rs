//! Newline-delimited JSON session protocol around [`CbEnv`].
//!
//! Requests: `{"cmd":"hello"}`, `{"cmd":"reset","seed":N}`,
//! `{"cmd":"step","action":[...]}`, `{"cmd":"close"}`. Every request gets
//! exactly one response line; malformed requests get `{"error":"..."}` and
//! leave the environment untouched.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, ToSocketAddrs};

use serde::Deserialize;

use super::{CbEnv, Observation, Transition};
use crate::error::Result;

#[derive(Debug, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case", deny_unknown_fields)]
enum Request {
    Hello,
    Reset { seed: u64 },
    Step { action: Vec<f64> },
    Close,
}

/// Floats are written with 17 significant digits so they round-trip exactly.
fn push_float(out: &mut String, v: f64) {
    if v.is_finite() {
        write!(out, "{v:.16e}").expect("writing to a String");
    } else {
        out.push_str("null");
    }
}

fn push_floats(out: &mut String, values: &[f64]) {
    out.push('[');
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        push_float(out, *v);
    }
    out.push(']');
}

fn obs_frame(obs: &Observation) -> String {
    let mut out = String::from("{\"obs\":");
    push_floats(&mut out, &obs.0);
    out.push('}');
    out
}

fn transition_frame(t: &Transition) -> String {
    let mut out = String::from("{\"obs\":");
    push_floats(&mut out, &t.observation.0);
    out.push_str(",\"reward\":");
    push_float(&mut out, t.reward);
    write!(out, ",\"done\":{},\"info\":{{\"delivered_bits\":", t.done).expect("writing to a String");
    push_float(&mut out, t.info.delivered_bits);
    let ids: Vec<String> = t.info.selection.iter().map(usize::to_string).collect();
    write!(
        out,
        ",\"selection\":[{}],\"alive\":{},\"round\":{}}}}}",
        ids.join(","),
        t.info.alive,
        t.info.round
    )
    .expect("writing to a String");
    out
}

fn error_frame(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

/// One client session over an environment.
pub struct Session {
    env: CbEnv,
    closed: bool,
}

impl Session {
    pub fn new(env: CbEnv) -> Self {
        Self { env, closed: false }
    }

    pub fn env(&self) -> &CbEnv {
        &self.env
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Answers one request line.
    pub fn handle(&mut self, line: &str) -> String {
        let request: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => return error_frame(&format!("malformed frame: {e}")),
        };
        match request {
            Request::Hello => format!(
                "{{\"n\":{},\"obs_dim\":{},\"n_cb\":{}}}",
                self.env.node_count(),
                self.env.obs_dim(),
                self.env.config().n_cb
            ),
            Request::Reset { seed } => match self.env.reset(seed) {
                Ok(obs) => obs_frame(&obs),
                Err(e) => error_frame(&e.to_string()),
            },
            Request::Step { action } => match self.env.step(&action) {
                Ok(t) => transition_frame(&t),
                Err(e) => error_frame(&e.to_string()),
            },
            Request::Close => {
                self.closed = true;
                "{\"closed\":true}".to_string()
            }
        }
    }

    /// Serves requests until `close` or end of input.
    pub fn serve<R: BufRead, W: Write>(&mut self, reader: R, mut writer: W) -> std::io::Result<()> {
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let reply = self.handle(&line);
            writer.write_all(reply.as_bytes())?;
            writer.write_all(b"\n")?;
            writer.flush()?;
            if self.closed {
                break;
            }
        }
        Ok(())
    }
}

/// Serves one session on standard input and output.
pub fn serve_stdio(env: CbEnv) -> Result<()> {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    Session::new(env).serve(stdin.lock(), stdout.lock())?;
    Ok(())
}

/// Accepts one TCP client on `addr` and serves it; `on_bound` receives the bound address.
pub fn serve_tcp(env: CbEnv, addr: impl ToSocketAddrs, on_bound: impl FnOnce(std::net::SocketAddr)) -> Result<()> {
    let listener = TcpListener::bind(addr)?;
    on_bound(listener.local_addr()?);
    let (stream, _) = listener.accept()?;
    let reader = BufReader::new(stream.try_clone()?);
    Session::new(env).serve(reader, stream)?;
    Ok(())
}
