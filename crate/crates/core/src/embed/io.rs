use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::EmbeddingModel;
use crate::{Error, Result};

/// Text format: `w2v v1 <vocab_size> <dim>` then `token v1 v2 …` per word.
pub fn write_model<W: Write>(model: &EmbeddingModel, mut w: W) -> Result<()> {
    writeln!(w, "w2v v1 {} {}", model.len(), model.dim())?;
    for (i, word) in model.words().iter().enumerate() {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!("token '{word}' cannot be written")));
        }
        w.write_all(word.as_bytes())?;
        for v in model.vector_at(i) {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut w = BufWriter::new(file);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_model<R: BufRead>(r: R) -> Result<EmbeddingModel> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "w2v" || parts[1] != "v1" {
        return Err(Error::parse(1, "expected 'w2v v1 <vocab_size> <dim>'"));
    }
    let vocab_size: usize = parts[2].parse().map_err(|_| Error::parse(1, "bad vocab_size"))?;
    let dim: usize = parts[3].parse().map_err(|_| Error::parse(1, "bad dim"))?;

    let mut words = Vec::with_capacity(vocab_size);
    let mut input = Vec::with_capacity(vocab_size * dim);
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if words.len() == vocab_size {
            return Err(Error::parse(lineno, format!("more than {vocab_size} vectors")));
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default();
        let before = input.len();
        for f in fields {
            let v: f32 = f
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad value '{f}'")))?;
            if !v.is_finite() {
                return Err(Error::parse(lineno, "non-finite value"));
            }
            input.push(v);
        }
        if input.len() - before != dim {
            return Err(Error::parse(
                lineno,
                format!("expected {dim} values, found {}", input.len() - before),
            ));
        }
        words.push(word.to_string());
    }
    if words.len() != vocab_size {
        return Err(Error::parse(
            words.len() + 2,
            format!("header announces {vocab_size} vectors, found {}", words.len()),
        ));
    }
    EmbeddingModel::from_vectors(words, dim, input).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    read_model(BufReader::new(file))
}
