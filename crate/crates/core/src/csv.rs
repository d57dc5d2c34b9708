//! Minimal RFC 4180 reader and writer.
//!
//! Quoted fields may span lines and contain doubled quotes. Errors carry
//! the byte offset at which the problem was detected; an unterminated
//! quoted field is reported at the offset of its opening quote.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    FieldStart,
    Unquoted,
    Quoted,
    QuoteInQuoted,
}

pub struct Reader<R> {
    inner: R,
    offset: u64,
    done: bool,
}

impl<R: BufRead> Reader<R> {
    pub fn new(inner: R) -> Self {
        Reader { inner, offset: 0, done: false }
    }

    /// Byte offset of the next unread byte.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Reads the next record; `None` at end of input. Blank lines are skipped.
    pub fn next_record(&mut self) -> Result<Option<Vec<String>>> {
        if self.done {
            return Ok(None);
        }
        let mut fields: Vec<String> = Vec::new();
        let mut field: Vec<u8> = Vec::new();
        let mut state = State::FieldStart;
        let mut quote_start = 0u64;
        let mut field_start = self.offset;
        let mut saw_any = false;

        loop {
            let buf = match self.inner.fill_buf() {
                Ok(b) => b,
                Err(e) => return Err(Error::Csv { offset: self.offset, message: e.to_string() }),
            };
            if buf.is_empty() {
                self.done = true;
                return match state {
                    State::Quoted => {
                        Err(Error::Csv { offset: quote_start, message: "unterminated quoted field".into() })
                    }
                    _ if !saw_any => Ok(None),
                    _ => {
                        fields.push(utf8(field, field_start)?);
                        Ok(Some(fields))
                    }
                };
            }

            let mut used = 0;
            let mut finished = false;
            for &b in buf {
                let at = self.offset + used as u64;
                used += 1;
                match state {
                    State::FieldStart | State::Unquoted => match b {
                        b'"' if state == State::FieldStart => {
                            state = State::Quoted;
                            quote_start = at;
                            saw_any = true;
                        }
                        b',' => {
                            fields.push(utf8(std::mem::take(&mut field), field_start)?);
                            field_start = at + 1;
                            state = State::FieldStart;
                            saw_any = true;
                        }
                        b'\r' => {}
                        b'\n' => {
                            if saw_any {
                                finished = true;
                                break;
                            }
                            field_start = at + 1;
                        }
                        _ => {
                            field.push(b);
                            state = State::Unquoted;
                            saw_any = true;
                        }
                    },
                    State::Quoted => {
                        if b == b'"' {
                            state = State::QuoteInQuoted;
                        } else {
                            field.push(b);
                        }
                    }
                    State::QuoteInQuoted => match b {
                        b'"' => {
                            field.push(b'"');
                            state = State::Quoted;
                        }
                        b',' => {
                            fields.push(utf8(std::mem::take(&mut field), field_start)?);
                            field_start = at + 1;
                            state = State::FieldStart;
                        }
                        b'\r' => {}
                        b'\n' => {
                            finished = true;
                            break;
                        }
                        _ => {
                            self.offset += used as u64;
                            self.inner.consume(used);
                            return Err(Error::Csv {
                                offset: at,
                                message: "unexpected character after closing quote".into(),
                            });
                        }
                    },
                }
            }
            self.offset += used as u64;
            self.inner.consume(used);
            if finished {
                fields.push(utf8(field, field_start)?);
                return Ok(Some(fields));
            }
        }
    }
}

fn utf8(bytes: Vec<u8>, offset: u64) -> Result<String> {
    String::from_utf8(bytes).map_err(|e| Error::Csv {
        offset: offset + e.utf8_error().valid_up_to() as u64,
        message: "invalid UTF-8".into(),
    })
}

/// Column lookup by header name (trimmed, case-insensitive).
pub struct Header {
    index: HashMap<String, usize>,
}

impl Header {
    pub fn new(names: &[String]) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.trim().trim_start_matches('\u{feff}').to_ascii_uppercase(), i))
            .collect();
        Header { index }
    }

    /// Resolves each required column, failing on the first missing one.
    pub fn require(&self, source_name: &str, columns: &[&str]) -> Result<Vec<usize>> {
        columns
            .iter()
            .map(|c| {
                self.index.get(*c).copied().ok_or_else(|| Error::Parse {
                    source_name: source_name.to_string(),
                    row: 0,
                    column: c.to_string(),
                    message: "required column missing from header".into(),
                })
            })
            .collect()
    }
}

/// Writes one record, quoting fields that need it.
pub fn write_record<W: Write, S: AsRef<str>>(out: &mut W, fields: &[S]) -> std::io::Result<()> {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.write_all(b",")?;
        }
        let f = f.as_ref();
        if f.contains([',', '"', '\n', '\r']) {
            out.write_all(b"\"")?;
            out.write_all(f.replace('"', "\"\"").as_bytes())?;
            out.write_all(b"\"")?;
        } else {
            out.write_all(f.as_bytes())?;
        }
    }
    out.write_all(b"\n")
}
