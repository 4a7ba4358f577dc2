use std::fmt::Write as _;

use irony_core::{Error, Result};

/// `a_i / max(a)`, so the heaviest token is fully opaque.
pub fn opacities(weights: &[f64]) -> Vec<f64> {
    let max = weights.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![0.0; weights.len()];
    }
    weights.iter().map(|w| w / max).collect()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// One heat-mapped line.
#[derive(Clone, Debug)]
pub struct HeatRow {
    pub caption: String,
    pub tokens: Vec<String>,
    pub weights: Vec<f64>,
    /// Inserted between spans; a space for words, empty for characters.
    pub separator: String,
}

fn render_row(out: &mut String, row: &HeatRow) -> Result<()> {
    if row.tokens.len() != row.weights.len() {
        return Err(Error::LengthMismatch {
            what: "tokens and attention weights",
            left: row.tokens.len(),
            right: row.weights.len(),
        });
    }
    let _ = write!(out, "<div class=\"row\"><span class=\"caption\">{}</span> ", escape(&row.caption));
    for (i, (tok, o)) in row.tokens.iter().zip(opacities(&row.weights)).enumerate() {
        if i > 0 {
            out.push_str(&escape(&row.separator));
        }
        let _ = write!(
            out,
            "<span class=\"tok\" style=\"background-color: rgba(220, 40, 40, {o:.4})\" title=\"{:.4}\">{}</span>",
            row.weights[i],
            escape(tok)
        );
    }
    out.push_str("</div>\n");
    Ok(())
}

/// A self-contained page with one line per row.
pub fn attention_page(title: &str, rows: &[HeatRow]) -> Result<String> {
    let mut out = String::new();
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n<style>\n\
         body {{ font-family: monospace; line-height: 2; }}\n\
         .tok {{ padding: 2px 1px; border-radius: 3px; }}\n\
         .caption {{ color: #666; margin-right: 1em; }}\n\
         </style>\n</head>\n<body>\n",
        escape(title)
    );
    for row in rows {
        render_row(&mut out, row)?;
    }
    out.push_str("</body>\n</html>\n");
    Ok(out)
}

/// Single-sequence convenience wrapper.
pub fn attention_html(tokens: &[String], weights: &[f64]) -> Result<String> {
    attention_page(
        "attention",
        &[HeatRow {
            caption: String::new(),
            tokens: tokens.to_vec(),
            weights: weights.to_vec(),
            separator: " ".into(),
        }],
    )
}
