//! Minimal binary PGM (P5, 8-bit) reader and writer.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

/// Reads a binary P5 image with maxval <= 255. Header comments (#) are
/// skipped.
pub fn read_pgm<R: BufRead>(mut r: R) -> Result<PgmImage> {
    let mut magic = [0u8; 2];
    r.read_exact(&mut magic)?;
    if &magic != b"P5" {
        return Err(Error::Parse { line: 1, msg: "not a binary PGM (expected P5)".into() });
    }
    let mut fields = Vec::with_capacity(3);
    while fields.len() < 3 {
        fields.push(read_header_token(&mut r)?);
    }
    let width: usize = fields[0].parse().map_err(|_| bad_header("width"))?;
    let height: usize = fields[1].parse().map_err(|_| bad_header("height"))?;
    let maxval: usize = fields[2].parse().map_err(|_| bad_header("maxval"))?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse { line: 1, msg: format!("unsupported maxval {maxval}") });
    }
    let mut data = vec![0u8; width * height];
    r.read_exact(&mut data)?;
    Ok(PgmImage { width, height, data })
}

fn read_header_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut token = String::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)?;
        match byte[0] {
            b'#' => {
                // Comment runs to end of line.
                let mut rest = Vec::new();
                r.read_until(b'\n', &mut rest)?;
            }
            c if c.is_ascii_whitespace() => {
                if !token.is_empty() {
                    return Ok(token);
                }
            }
            c => token.push(c as char),
        }
    }
}

fn bad_header(field: &str) -> Error {
    Error::Parse { line: 1, msg: format!("bad PGM header field: {field}") }
}

pub fn write_pgm<W: Write>(w: &mut W, width: usize, height: usize, data: &[u8]) -> Result<()> {
    assert_eq!(data.len(), width * height);
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(data)?;
    Ok(())
}
