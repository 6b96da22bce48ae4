//! The engine as a mask service: an external decoding loop sends candidate
//! token strings and learns which of them keep the verse on meter.
//!
//! Newline-delimited JSON, one session per connection:
//!
//! ```text
//! → {"type":"hello","meter":"anustubh","specials":["</s>"]}
//! ← {"type":"ok","session":1,"max_syllables":32,"pattern":"....lgg....."}
//! → {"type":"mask","candidates":["क","ा"," "]}
//! ← {"type":"survivors","indices":[0]}
//! → {"type":"accept","token":"क"}
//! ← {"type":"state","syllables":1,"weights":"l","determinate":false,"complete":false}
//! → {"type":"reset"}
//! ← {"type":"state","syllables":0,"weights":"","determinate":true,"complete":false}
//! → {"type":"bye"}
//! ```
//!
//! Declared specials (language tags, end markers) always survive and leave
//! the verse untouched when accepted. Survivor indices follow the same rules
//! as [`Scanner::check`](super::Scanner::check), so a client gets exactly the
//! set the built-in decoder would keep.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Scanner;
use crate::lm::protocol::{read_frame, write_frame};
use crate::lm::LmError;
use crate::meter::MeterSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MaskRequest {
    Hello {
        #[serde(default)]
        meter: Option<String>,
        #[serde(default)]
        specials: Vec<String>,
    },
    Mask {
        candidates: Vec<String>,
    },
    Accept {
        token: String,
    },
    Reset,
    Bye,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MaskResponse {
    Ok {
        session: u64,
        max_syllables: usize,
        pattern: String,
    },
    Survivors {
        indices: Vec<usize>,
    },
    State {
        syllables: usize,
        weights: String,
        determinate: bool,
        complete: bool,
    },
    Error {
        message: String,
    },
}

/// Settings shared by every session of a server.
#[derive(Debug, Clone)]
pub struct MaskServiceConfig {
    /// Meter used when `hello` names none.
    pub default_meter: MeterSpec,
    /// Directories searched for meter files named in `hello`.
    pub meter_path: Option<String>,
    pub cache_capacity: usize,
}

impl Default for MaskServiceConfig {
    fn default() -> Self {
        Self {
            default_meter: MeterSpec::anustubh(),
            meter_path: None,
            cache_capacity: 1000,
        }
    }
}

struct Session {
    scanner: Scanner,
    specials: HashSet<String>,
}

impl Session {
    fn state(&self) -> MaskResponse {
        MaskResponse::State {
            syllables: self.scanner.syllables(),
            weights: self.scanner.weights().to_string(),
            determinate: self.scanner.weights().last_determinate,
            complete: self.scanner.is_complete(),
        }
    }
}

/// Serves one session until `bye` or end of stream.
pub fn serve_mask(
    config: &MaskServiceConfig,
    session_id: u64,
    mut reader: impl BufRead,
    mut writer: impl Write,
) -> Result<(), LmError> {
    let mut session: Option<Session> = None;
    loop {
        let request = match read_frame::<MaskRequest>(&mut reader) {
            Ok(Some(r)) => r,
            Ok(None) => return Ok(()),
            Err(e) => {
                write_frame(&mut writer, &MaskResponse::Error { message: e.to_string() })?;
                return Err(e);
            }
        };
        let response = match (request, session.as_mut()) {
            (MaskRequest::Bye, _) => return Ok(()),
            (MaskRequest::Hello { meter, specials }, _) => {
                let spec = match meter {
                    None => Ok(config.default_meter.clone()),
                    Some(name) => MeterSpec::resolve(&name, config.meter_path.as_deref()),
                };
                match spec {
                    Ok(spec) => {
                        let response = MaskResponse::Ok {
                            session: session_id,
                            max_syllables: spec.total_len(),
                            pattern: spec.pattern(),
                        };
                        session = Some(Session {
                            scanner: Scanner::new(&spec, config.cache_capacity),
                            specials: specials.into_iter().collect(),
                        });
                        response
                    }
                    Err(e) => MaskResponse::Error {
                        message: e.to_string(),
                    },
                }
            }
            (_, None) => MaskResponse::Error {
                message: "hello required first".into(),
            },
            (MaskRequest::Mask { candidates }, Some(s)) => MaskResponse::Survivors {
                indices: candidates
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| s.specials.contains(*c) || s.scanner.check(c).is_ok())
                    .map(|(i, _)| i)
                    .collect(),
            },
            (MaskRequest::Accept { token }, Some(s)) => {
                if s.specials.contains(&token) {
                    s.state()
                } else {
                    match s.scanner.accept(&token) {
                        Ok(_) => s.state(),
                        Err(r) => MaskResponse::Error {
                            message: format!("token {token:?} rejected: {r:?}"),
                        },
                    }
                }
            }
            (MaskRequest::Reset, Some(s)) => {
                let spec = s.scanner.spec().clone();
                s.scanner = Scanner::new(&spec, config.cache_capacity);
                s.state()
            }
        };
        write_frame(&mut writer, &response)?;
    }
}

/// Accepts connections forever, one thread and one session per connection.
pub fn serve_mask_tcp(config: Arc<MaskServiceConfig>, listener: TcpListener) -> Result<(), LmError> {
    let next_id = Arc::new(AtomicU64::new(1));
    for stream in listener.incoming() {
        let stream = stream?;
        let config = config.clone();
        let id = next_id.fetch_add(1, Ordering::Relaxed);
        std::thread::spawn(move || {
            let reader = BufReader::new(stream.try_clone()?);
            serve_mask(&config, id, reader, stream)
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn run(lines: &[&str]) -> Vec<MaskResponse> {
        let input = lines.join("\n") + "\n";
        let mut out = Vec::new();
        serve_mask(&MaskServiceConfig::default(), 7, Cursor::new(input), &mut out).unwrap();
        String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    #[test]
    fn session_flow() {
        let r = run(&[
            r#"{"type":"mask","candidates":["क"]}"#,
            r#"{"type":"hello","specials":["<2sa>"]}"#,
            r#"{"type":"mask","candidates":["क","ा"," ","<2sa>",""]}"#,
            r#"{"type":"accept","token":"<2sa>"}"#,
            r#"{"type":"accept","token":"क"}"#,
            r#"{"type":"accept","token":"ः"}"#,
            r#"{"type":"accept","token":"ः"}"#,
            r#"{"type":"reset"}"#,
            r#"{"type":"bye"}"#,
            r#"{"type":"mask","candidates":["क"]}"#,
        ]);
        assert_eq!(r.len(), 8);
        assert!(matches!(r[0], MaskResponse::Error { .. }));
        assert_eq!(
            r[1],
            MaskResponse::Ok {
                session: 7,
                max_syllables: 32,
                pattern: "....lgg.....lgl.....lgg.....lgl.".into()
            }
        );
        assert_eq!(r[2], MaskResponse::Survivors { indices: vec![0, 3] });
        assert_eq!(
            r[3],
            MaskResponse::State {
                syllables: 0,
                weights: String::new(),
                determinate: true,
                complete: false
            }
        );
        assert_eq!(
            r[4],
            MaskResponse::State {
                syllables: 1,
                weights: "l".into(),
                determinate: false,
                complete: false
            }
        );
        assert_eq!(
            r[5],
            MaskResponse::State {
                syllables: 1,
                weights: "g".into(),
                determinate: true,
                complete: false
            }
        );
        assert!(matches!(r[6], MaskResponse::Error { .. }));
        assert!(matches!(r[7], MaskResponse::State { syllables: 0, .. }));
    }

    #[test]
    fn unknown_meter_is_reported() {
        let r = run(&[r#"{"type":"hello","meter":"no-such-meter"}"#]);
        assert!(matches!(r[0], MaskResponse::Error { .. }));
    }
}
