//! Newline-delimited JSON protocol between the decoder (client) and a model
//! server.
//!
//! ```text
//! → {"type":"hello","vocab_hash":"<hex sha-256 of the vocabulary>"}
//! ← {"type":"ok","vocab_size":1234}
//! → {"type":"next","context":[5,17,9],"m":25}
//! ← {"type":"dist","top":[[17,-0.11],[5,-2.3],...]}
//! → {"type":"bye"}
//! ```
//!
//! `top` holds natural-log probabilities, best first. A server may return
//! fewer than `m` entries; the client then asks again with a larger `m` if it
//! needs more. Errors come back as `{"type":"error","message":"..."}`.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{LanguageModel, LmError, LocalLm, NgramModel, TokenId, Vocab};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
const DEFAULT_M: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Request {
    Hello {
        vocab_hash: String,
    },
    Next {
        context: Vec<TokenId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    Bye,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Ok { vocab_size: usize },
    Dist { top: Vec<(TokenId, f64)> },
    Error { message: String },
}

pub fn write_frame<T: Serialize>(w: &mut impl Write, frame: &T) -> Result<(), LmError> {
    let mut line = serde_json::to_string(frame).map_err(|e| LmError::Protocol(e.to_string()))?;
    line.push('\n');
    w.write_all(line.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `None` at end of stream.
pub fn read_frame<T: DeserializeOwned>(r: &mut impl BufRead) -> Result<Option<T>, LmError> {
    let mut line = String::new();
    if r.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    serde_json::from_str(line.trim_end())
        .map(Some)
        .map_err(|e| LmError::Protocol(format!("malformed frame {:?}: {e}", line.trim_end())))
}

/// Serves any language model over one connection until `bye` or end of
/// stream.
pub fn serve(
    lm: &mut dyn LanguageModel,
    mut reader: impl BufRead,
    mut writer: impl Write,
) -> Result<(), LmError> {
    let mut greeted = false;
    loop {
        let request = match read_frame::<Request>(&mut reader) {
            Ok(Some(r)) => r,
            Ok(None) => return Ok(()),
            Err(e) => {
                write_frame(&mut writer, &Response::Error { message: e.to_string() })?;
                return Err(e);
            }
        };
        let response = match request {
            Request::Bye => return Ok(()),
            Request::Hello { vocab_hash } => {
                if vocab_hash == lm.vocab().digest() {
                    greeted = true;
                    Response::Ok {
                        vocab_size: lm.vocab().len(),
                    }
                } else {
                    Response::Error {
                        message: "vocabulary hash mismatch".into(),
                    }
                }
            }
            Request::Next { .. } if !greeted => Response::Error {
                message: "hello required before next".into(),
            },
            Request::Next { context, m } => match lm.top(&context, m.unwrap_or(DEFAULT_M)) {
                Ok(top) => Response::Dist {
                    top: top
                        .into_iter()
                        .filter(|&(_, p)| p > 0.0)
                        .map(|(id, p)| (id, p.ln()))
                        .collect(),
                },
                Err(e) => Response::Error {
                    message: e.to_string(),
                },
            },
        };
        write_frame(&mut writer, &response)?;
    }
}

/// Serves an n-gram model to every client of a TCP listener, one thread per
/// connection. Returns only if accepting fails.
pub fn serve_tcp(model: Arc<NgramModel>, listener: TcpListener) -> Result<(), LmError> {
    for stream in listener.incoming() {
        let stream = stream?;
        let model = model.clone();
        std::thread::spawn(move || {
            let reader = BufReader::new(stream.try_clone()?);
            let mut lm = LocalLm::new(&model);
            serve(&mut lm, reader, stream)
        });
    }
    Ok(())
}

/// Client side: a model reached over the protocol.
pub struct RemoteLm<R: BufRead, W: Write> {
    reader: R,
    writer: W,
    vocab: Vocab,
    closed: bool,
}

impl<R: BufRead, W: Write> RemoteLm<R, W> {
    /// Performs the handshake over an established stream pair.
    pub fn connect(mut reader: R, mut writer: W, vocab: Vocab) -> Result<Self, LmError> {
        write_frame(
            &mut writer,
            &Request::Hello {
                vocab_hash: vocab.digest(),
            },
        )?;
        match read_frame::<Response>(&mut reader)? {
            Some(Response::Ok { vocab_size }) if vocab_size == vocab.len() => Ok(Self {
                reader,
                writer,
                vocab,
                closed: false,
            }),
            Some(Response::Ok { vocab_size }) => Err(LmError::Protocol(format!(
                "server vocabulary has {vocab_size} tokens, expected {}",
                vocab.len()
            ))),
            Some(Response::Error { message }) => Err(LmError::Protocol(message)),
            Some(other) => Err(LmError::Protocol(format!("unexpected {other:?}"))),
            None => Err(LmError::Protocol("server closed during handshake".into())),
        }
    }

    pub fn close(mut self) -> Result<(), LmError> {
        self.closed = true;
        write_frame(&mut self.writer, &Request::Bye)
    }
}

impl RemoteLm<BufReader<TcpStream>, TcpStream> {
    pub fn connect_tcp(
        addr: impl ToSocketAddrs,
        vocab: Vocab,
        timeout: Duration,
    ) -> Result<Self, LmError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        Self::connect(reader, stream, vocab)
    }
}

impl<R: BufRead, W: Write> LanguageModel for RemoteLm<R, W> {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn top(&mut self, context: &[TokenId], m: usize) -> Result<Vec<(TokenId, f64)>, LmError> {
        self.vocab.check(context)?;
        write_frame(
            &mut self.writer,
            &Request::Next {
                context: context.to_vec(),
                m: Some(m),
            },
        )?;
        match read_frame::<Response>(&mut self.reader)? {
            Some(Response::Dist { top }) => {
                let mut out = Vec::with_capacity(top.len());
                for (id, logp) in top {
                    if id as usize >= self.vocab.len() || !(logp <= 0.0) {
                        return Err(LmError::Protocol(format!("bad entry [{id}, {logp}]")));
                    }
                    out.push((id, logp.exp()));
                }
                out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                out.truncate(m);
                Ok(out)
            }
            Some(Response::Error { message }) => Err(LmError::Protocol(message)),
            Some(other) => Err(LmError::Protocol(format!("unexpected {other:?}"))),
            None => Err(LmError::Protocol("server closed the connection".into())),
        }
    }
}

impl<R: BufRead, W: Write> Drop for RemoteLm<R, W> {
    fn drop(&mut self) {
        if !self.closed {
            let _ = write_frame(&mut self.writer, &Request::Bye);
        }
    }
}
