//! Version-tagged text serialization of trained models.
//!
//! Layout: a `ALSTM v1` first line; one `tensor <name> <rows> <cols>` block
//! per parameter in insertion order with one space-separated row per line;
//! then a `config` block of `key = value` lines. Floats are printed with 17
//! significant digits, so parse/serialize round-trips are bit-exact.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{AlstmParams, CellVariant, Mode, ModelConfig};
use crate::tensor::Tensor;

const MAGIC: &str = "ALSTM v1";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_model_string(model: &AlstmParams) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    for (name, _, tensor) in model.params().iter() {
        out.push_str(&format!("tensor {} {} {}\n", name, tensor.rows(), tensor.cols()));
        for r in 0..tensor.rows() {
            let row: Vec<String> = (0..tensor.cols()).map(|c| fmt_f64(tensor.get(r, c))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    let c = model.config();
    out.push_str("config\n");
    out.push_str(&format!("d_in = {}\n", c.d_in));
    out.push_str(&format!("d_fx = {}\n", c.d_fx));
    out.push_str(&format!("d_z = {}\n", c.d_z));
    out.push_str(&format!("d_fz = {}\n", c.d_fz));
    out.push_str(&format!("n_h = {}\n", c.n_h));
    out.push_str(&format!("horizon = {}\n", c.horizon));
    out.push_str(&format!("beta = {}\n", fmt_f64(c.beta)));
    let variant = match c.cell_variant {
        CellVariant::Standard => "standard",
        CellVariant::PaperLiteral => "paper_literal",
    };
    out.push_str(&format!("cell_variant = {variant}\n"));
    let mode = match c.mode {
        Mode::Alstm => "alstm",
        Mode::LstmBaseline => "lstm_baseline",
    };
    out.push_str(&format!("mode = {mode}\n"));
    out.push_str(&format!("loss_over_all_steps = {}\n", c.loss_over_all_steps));
    out
}

pub fn save_model(model: &AlstmParams, mut w: impl Write) -> Result<()> {
    w.write_all(write_model_string(model).as_bytes())?;
    Ok(())
}

pub fn parse_model(text: &str) -> Result<AlstmParams> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim() == MAGIC => {}
        other => {
            return Err(Error::Parse(format!(
                "expected `{MAGIC}` header, found {other:?}"
            )))
        }
    }

    let mut tensors: Vec<(String, Tensor)> = Vec::new();
    let mut config_lines: Vec<&str> = Vec::new();
    let mut in_config = false;
    while let Some(line) = lines.next() {
        let line = line.trim_end();
        if in_config {
            if !line.trim().is_empty() {
                config_lines.push(line);
            }
            continue;
        }
        if line.trim() == "config" {
            in_config = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("tensor") => {}
            Some(other) => return Err(Error::Parse(format!("unexpected line starting with {other:?}"))),
            None => continue,
        }
        let name = parts
            .next()
            .ok_or_else(|| Error::Parse("tensor header missing name".into()))?
            .to_string();
        let rows: usize = parse_field(parts.next(), "tensor rows")?;
        let cols: usize = parse_field(parts.next(), "tensor cols")?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let row_line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("tensor {name}: missing row data")))?;
            for cell in row_line.split_whitespace() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Parse(format!("tensor {name}: bad value {cell:?}")))?;
                data.push(v);
            }
        }
        if data.len() != rows * cols {
            return Err(Error::Parse(format!(
                "tensor {name}: expected {} values, found {}",
                rows * cols,
                data.len()
            )));
        }
        tensors.push((name, Tensor::from_vec(rows, cols, data)?));
    }
    if !in_config {
        return Err(Error::Parse("missing config block".into()));
    }

    let mut kv = HashMap::new();
    for line in config_lines {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line without `=`: {line:?}")))?;
        kv.insert(key.trim().to_string(), value.trim().to_string());
    }
    let config = config_from_map(&kv)?;

    // Build the layout deterministically, then overwrite every tensor from
    // the file. Extra or missing names are structural errors.
    let mut model = AlstmParams::init(config, 0)?;
    if tensors.len() != model.params().len() {
        return Err(Error::Parse(format!(
            "model file holds {} tensors, config implies {}",
            tensors.len(),
            model.params().len()
        )));
    }
    for (name, tensor) in tensors {
        let id = model
            .params()
            .id_of(&name)
            .ok_or_else(|| Error::Parse(format!("unknown parameter {name:?}")))?;
        if model.params().value(id).shape() != tensor.shape() {
            return Err(Error::Parse(format!(
                "parameter {name:?} has shape {:?}, config implies {:?}",
                tensor.shape(),
                model.params().value(id).shape()
            )));
        }
        *model.params_mut().value_mut(id) = tensor;
    }
    Ok(model)
}

pub fn load_model(mut r: impl BufRead) -> Result<AlstmParams> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_model(&text)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}

fn config_from_map(kv: &HashMap<String, String>) -> Result<ModelConfig> {
    let get = |key: &str| {
        kv.get(key)
            .ok_or_else(|| Error::Parse(format!("config block missing key {key:?}")))
    };
    let usize_of = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|_| Error::Parse(format!("config key {key:?} is not an integer")))
    };
    let cell_variant = match get("cell_variant")?.as_str() {
        "standard" => CellVariant::Standard,
        "paper_literal" => CellVariant::PaperLiteral,
        other => return Err(Error::Parse(format!("unknown cell_variant {other:?}"))),
    };
    let mode = match get("mode")?.as_str() {
        "alstm" => Mode::Alstm,
        "lstm_baseline" => Mode::LstmBaseline,
        other => return Err(Error::Parse(format!("unknown mode {other:?}"))),
    };
    Ok(ModelConfig {
        d_in: usize_of("d_in")?,
        d_fx: usize_of("d_fx")?,
        d_z: usize_of("d_z")?,
        d_fz: usize_of("d_fz")?,
        n_h: usize_of("n_h")?,
        horizon: usize_of("horizon")?,
        beta: get("beta")?
            .parse()
            .map_err(|_| Error::Parse("config key \"beta\" is not a number".into()))?,
        cell_variant,
        mode,
        loss_over_all_steps: match get("loss_over_all_steps")?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(Error::Parse(format!("bad loss_over_all_steps {other:?}"))),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn sample_model(mode: Mode) -> AlstmParams {
        let config = ModelConfig {
            d_fx: 3,
            d_z: 2,
            d_fz: 3,
            n_h: 4,
            horizon: 2,
            mode,
            ..ModelConfig::default()
        };
        AlstmParams::init(config, 314).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        for mode in [Mode::Alstm, Mode::LstmBaseline] {
            let model = sample_model(mode);
            let text = write_model_string(&model);
            let parsed = parse_model(&text).unwrap();
            assert_eq!(write_model_string(&parsed), text);
        }
    }

    #[test]
    fn loaded_model_predicts_bit_exactly() {
        let model = sample_model(Mode::Alstm);
        let parsed = parse_model(&write_model_string(&model)).unwrap();
        let window: Vec<Tensor> = [0.2, 0.9, 0.4].iter().map(|&v| Tensor::column(&[v])).collect();
        let a = model.forward_window(&window).unwrap();
        let b = parsed.forward_window(&window).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(matches!(parse_model("LSTM v0\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn truncated_tensor_rejected() {
        let model = sample_model(Mode::Alstm);
        let text = write_model_string(&model);
        let cut: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(parse_model(&cut).is_err());
    }

    #[test]
    fn mismatched_shape_rejected() {
        let model = sample_model(Mode::Alstm);
        let text = write_model_string(&model).replace("tensor feat_x.w1 3 1", "tensor feat_x.w1 1 3");
        assert!(parse_model(&text).is_err());
    }
}
