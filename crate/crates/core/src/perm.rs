//! Permutations of {0, .., q-1} with cycle-notation text forms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// A permutation stored as its image list: `images[i]` is where interval i
/// is sent. The text forms accepted by [`Permutation::parse`] are cycle
/// notation (`"(012)"`, `"(0)(12)(3)(4)"`, symbols not mentioned are fixed)
/// and comma-separated image lists (`"1,2,0"`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(q: usize) -> Self {
        Permutation { images: (0..q).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, CoreError> {
        let q = images.len();
        if q == 0 {
            return Err(CoreError::Precondition("empty permutation".into()));
        }
        let mut seen = vec![false; q];
        for (i, &img) in images.iter().enumerate() {
            if img >= q {
                return Err(CoreError::Parse {
                    position: i,
                    message: format!("image {img} out of range for q = {q}"),
                });
            }
            if seen[img] {
                return Err(CoreError::Parse {
                    position: i,
                    message: format!("image {img} repeated; not a bijection"),
                });
            }
            seen[img] = true;
        }
        Ok(Permutation { images })
    }

    pub fn parse(text: &str, q: usize) -> Result<Self, CoreError> {
        if q == 0 {
            return Err(CoreError::Precondition("q must be positive".into()));
        }
        let s = text.trim();
        if s.starts_with('(') {
            Self::parse_cycles(s, q)
        } else {
            let mut images = Vec::with_capacity(q);
            let mut pos = 0;
            for part in s.split(',') {
                let v: usize = part.trim().parse().map_err(|_| CoreError::Parse {
                    position: pos,
                    message: format!("invalid image entry {part:?}"),
                })?;
                images.push(v);
                pos += part.len() + 1;
            }
            if images.len() != q {
                return Err(CoreError::Parse {
                    position: s.len(),
                    message: format!("expected {q} images, got {}", images.len()),
                });
            }
            Self::from_images(images)
        }
    }

    fn parse_cycles(s: &str, q: usize) -> Result<Self, CoreError> {
        let mut images: Vec<usize> = (0..q).collect();
        let mut moved = vec![false; q];
        let bytes = s.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c != '(' {
                return Err(CoreError::Parse {
                    position: i,
                    message: format!("expected '(' but found {c:?}"),
                });
            }
            let close = s[i..].find(')').ok_or(CoreError::Parse {
                position: i,
                message: "unclosed cycle".into(),
            })? + i;
            let body = &s[i + 1..close];
            let symbols = Self::cycle_symbols(body, i + 1, q)?;
            for w in 0..symbols.len() {
                let (from, to) = (symbols[w], symbols[(w + 1) % symbols.len()]);
                if from >= q || to >= q {
                    return Err(CoreError::Parse {
                        position: i + 1,
                        message: format!("symbol {} out of range for q = {q}", from.max(to)),
                    });
                }
                if symbols.len() == 1 {
                    // explicit fixed point, e.g. "(3)"
                    if moved[from] {
                        return Err(CoreError::Parse {
                            position: i + 1,
                            message: format!("symbol {from} appears in two cycles"),
                        });
                    }
                    moved[from] = true;
                    break;
                }
                if moved[from] {
                    return Err(CoreError::Parse {
                        position: i + 1,
                        message: format!("symbol {from} appears in two cycles"),
                    });
                }
                moved[from] = true;
                images[from] = to;
            }
            i = close + 1;
        }
        Self::from_images(images)
    }

    /// Splits a cycle body into symbols. With separators (commas or spaces)
    /// symbols may be multi-digit. A bare digit run like "012" is read one
    /// symbol per digit when q <= 10; for larger q an unseparated run is a
    /// single symbol, so that "(10)" is the fixed point 10 and not (1 0).
    fn cycle_symbols(body: &str, offset: usize, q: usize) -> Result<Vec<usize>, CoreError> {
        let separated = body.contains(',') || body.trim().contains(' ');
        let mut out = Vec::new();
        if separated {
            for tok in body.split(|c: char| c == ',' || c.is_whitespace()) {
                if tok.is_empty() {
                    continue;
                }
                out.push(tok.parse().map_err(|_| CoreError::Parse {
                    position: offset,
                    message: format!("invalid cycle symbol {tok:?}"),
                })?);
            }
        } else if q <= 10 {
            for ch in body.trim().chars() {
                let d = ch.to_digit(10).ok_or(CoreError::Parse {
                    position: offset,
                    message: format!("invalid cycle symbol {ch:?}"),
                })?;
                out.push(d as usize);
            }
        } else {
            out.push(body.trim().parse().map_err(|_| CoreError::Parse {
                position: offset,
                message: format!("invalid cycle symbol {body:?}"),
            })?);
        }
        if out.is_empty() {
            return Err(CoreError::Parse { position: offset, message: "empty cycle".into() });
        }
        Ok(out)
    }

    pub fn q(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &img) in self.images.iter().enumerate() {
            images[img] = i;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &img)| i == img)
    }

    /// Canonical cycle form: every cycle listed (fixed points included),
    /// each starting at its least symbol, cycles ordered by least symbol.
    pub fn cycle_string(&self) -> String {
        let q = self.images.len();
        let multi_digit = q > 10;
        let mut seen = vec![false; q];
        let mut out = String::new();
        for start in 0..q {
            if seen[start] {
                continue;
            }
            out.push('(');
            let mut i = start;
            let mut first = true;
            loop {
                if !first {
                    if multi_digit {
                        out.push(' ');
                    }
                } else {
                    first = false;
                }
                out.push_str(&i.to_string());
                seen[i] = true;
                i = self.images[i];
                if i == start {
                    break;
                }
            }
            out.push(')');
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_string())
    }
}
