//! Loading `.rees` files and building the extension machinery for them.
//!
//! Format: `group:` names a `.sgp` or `.tbl` file (relative to the `.rees`
//! file), `I:` and `L:` give the matrix shape, `P:` starts `L` rows of `I`
//! entries (`0` or a group word with `.`-separated letters), and `zero:`
//! says whether the presented semigroup keeps the adjoined zero.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use squier::extension::{
    build_ps, rees_extension_input, ExtensionContext, ExtensionInput, GroupedPresentation,
    ReesMatrix,
};
use squier::oracle::{enumerate, from_table, table_presentation, FiniteSemigroup};
use squier::words::{parse_presentation, Interner, Letter, Presentation, Word};

use crate::{input_err, map_enumerate_err, map_extension_err, read_file, CmdError};

pub struct LoadedRees {
    pub g_pres: Presentation,
    pub t_pres: Presentation,
    pub with_zero: bool,
    pub s: FiniteSemigroup,
    pub g_letter_elts: BTreeMap<Letter, usize>,
    pub g_elems: Vec<usize>,
    pub t_letter_elts: BTreeMap<Letter, usize>,
    pub t_elems: Vec<usize>,
    pub triple_elt: BTreeMap<(usize, usize, usize), usize>,
    pub p_entries: Vec<Option<usize>>,
    pub i_size: usize,
    pub l_size: usize,
}

pub fn load(
    path: &FsPath,
    limit: usize,
    node_budget: usize,
    interner: &mut Interner,
) -> Result<LoadedRees, CmdError> {
    let text = read_file(path)?;
    let dir = path.parent().unwrap_or(FsPath::new("."));

    let mut group_path: Option<String> = None;
    let mut i_size: Option<usize> = None;
    let mut l_size: Option<usize> = None;
    let mut with_zero: Option<bool> = None;
    let mut matrix_rows: Vec<String> = Vec::new();
    let mut in_matrix = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_matrix && matrix_rows.len() < l_size.unwrap_or(0) {
            matrix_rows.push(line.to_string());
            continue;
        }
        in_matrix = false;
        if let Some(rest) = line.strip_prefix("group:") {
            group_path = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("I:") {
            i_size = rest.trim().parse().ok();
        } else if let Some(rest) = line.strip_prefix("L:") {
            l_size = rest.trim().parse().ok();
        } else if line == "P:" {
            if l_size.is_none() {
                return Err(CmdError::Input(format!(
                    "line {line_no}: P: before L:"
                )));
            }
            in_matrix = true;
        } else if let Some(rest) = line.strip_prefix("zero:") {
            with_zero = match rest.trim() {
                "true" => Some(true),
                "false" => Some(false),
                other => {
                    return Err(CmdError::Input(format!(
                        "line {line_no}: zero must be true or false, got `{other}`"
                    )))
                }
            };
        } else {
            return Err(CmdError::Input(format!(
                "line {line_no}: unrecognised line `{line}`"
            )));
        }
    }
    let group_path = group_path.ok_or(CmdError::Input("missing group: line".into()))?;
    let i_size = i_size.ok_or(CmdError::Input("missing I: line".into()))?;
    let l_size = l_size.ok_or(CmdError::Input("missing L: line".into()))?;
    let with_zero = with_zero.ok_or(CmdError::Input("missing zero: line".into()))?;
    if matrix_rows.len() != l_size {
        return Err(CmdError::Input(format!(
            "expected {l_size} matrix rows, found {}",
            matrix_rows.len()
        )));
    }

    // The group: a presentation to enumerate, or a table.
    let gfile = dir.join(&group_path);
    let gtext = read_file(&gfile)?;
    let (g_pres, g_oracle) = match gfile.extension().and_then(|e| e.to_str()) {
        Some("tbl") => {
            let s = from_table(&gtext, interner).map_err(input_err)?;
            let (p, _) = table_presentation(&s, interner);
            (p, s)
        }
        _ => {
            let p = parse_presentation(&gtext, interner).map_err(input_err)?;
            let s = enumerate(&p, limit, node_budget).map_err(map_enumerate_err)?;
            (p, s)
        }
    };

    // Matrix entries: `0` or a `.`-separated group word.
    let by_name: BTreeMap<String, Letter> = g_pres
        .alphabet()
        .iter()
        .map(|&l| (interner.name(l).to_string(), l))
        .collect();
    let mut entry_words: Vec<Option<Word>> = Vec::with_capacity(i_size * l_size);
    for (r, row) in matrix_rows.iter().enumerate() {
        let cells: Vec<&str> = row.split_whitespace().collect();
        if cells.len() != i_size {
            return Err(CmdError::Input(format!(
                "matrix row {} has {} entries, expected {i_size}",
                r + 1,
                cells.len()
            )));
        }
        for cell in cells {
            if cell == "0" {
                entry_words.push(None);
                continue;
            }
            let mut w = Word::empty();
            for name in cell.split('.') {
                let letter = by_name.get(name).ok_or_else(|| {
                    CmdError::Input(format!("unknown group letter `{name}` in matrix"))
                })?;
                w.push(*letter);
            }
            entry_words.push(Some(w));
        }
    }

    let rees = ReesMatrix::new(g_oracle, g_pres, i_size, l_size, entry_words, true)
        .map_err(|e| CmdError::Input(e.to_string()))?;
    let (s, g_pres, g_letter_elts, g_elems, t_pres, t_letter_elts, t_elems, triple_elt, p_entries) =
        rees_extension_input(&rees, interner).map_err(map_extension_err)?;
    Ok(LoadedRees {
        g_pres,
        t_pres,
        with_zero,
        s,
        g_letter_elts,
        g_elems,
        t_letter_elts,
        t_elems,
        triple_elt,
        p_entries,
        i_size,
        l_size,
    })
}

pub fn build(
    loaded: &LoadedRees,
    interner: &mut Interner,
) -> Result<(GroupedPresentation, ExtensionContext), CmdError> {
    let input = ExtensionInput {
        g_pres: &loaded.g_pres,
        g_letter_elts: &loaded.g_letter_elts,
        g_elems: &loaded.g_elems,
        t_pres: &loaded.t_pres,
        t_letter_elts: &loaded.t_letter_elts,
        t_elems: &loaded.t_elems,
        s: &loaded.s,
        i_size: loaded.i_size,
        l_size: loaded.l_size,
        p_entries: &loaded.p_entries,
        triple_elt: &loaded.triple_elt,
    };
    let ctx = ExtensionContext::new(&input, interner).map_err(map_extension_err)?;
    let gp = build_ps(&ctx).map_err(map_extension_err)?;
    Ok((gp, ctx))
}
