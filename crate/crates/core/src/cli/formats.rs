//! CSV schemas of every table the command line writes. Tables are rendered
//! to memory, checked against their schema, then written.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Any value `f64::from_str` accepts.
    Float,
    /// A float or the empty string.
    OptFloat,
    /// Unsigned integer.
    Count,
    /// Signed integer.
    Int,
    Bool,
    /// One of a fixed set of labels.
    Label(&'static [&'static str]),
}

impl Kind {
    fn accepts(self, field: &str) -> bool {
        match self {
            Kind::Float => field.parse::<f64>().is_ok(),
            Kind::OptFloat => field.is_empty() || field.parse::<f64>().is_ok(),
            Kind::Count => field.parse::<u64>().is_ok(),
            Kind::Int => field.parse::<i64>().is_ok(),
            Kind::Bool => field == "true" || field == "false",
            Kind::Label(set) => set.contains(&field),
        }
    }

    pub fn describe(self) -> String {
        match self {
            Kind::Float => "float".into(),
            Kind::OptFloat => "float or empty".into(),
            Kind::Count => "unsigned integer".into(),
            Kind::Int => "integer".into(),
            Kind::Bool => "`true` / `false`".into(),
            Kind::Label(set) => set.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", "),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Schema {
    pub name: &'static str,
    pub columns: &'static [(&'static str, Kind)],
}

const PHASES: &[&str] = &[
    "PT_unbroken",
    "PT_broken_plus",
    "PT_broken_minus",
    "zero_mode",
    "exceptional",
];

pub const ROOTS: Schema = Schema {
    name: "roots",
    columns: &[
        ("gamma_tilde", Kind::Float),
        ("k_re", Kind::Float),
        ("k_im", Kind::Float),
        ("E_re", Kind::Float),
        ("E_im", Kind::Float),
        ("phase", Kind::Label(PHASES)),
    ],
};

pub const ROOTS_BY_N: Schema = Schema {
    name: "roots_by_N",
    columns: &[
        ("N", Kind::Count),
        ("gamma_tilde", Kind::Float),
        ("k_re", Kind::Float),
        ("k_im", Kind::Float),
        ("E_re", Kind::Float),
        ("E_im", Kind::Float),
        ("phase", Kind::Label(PHASES)),
    ],
};

pub const TRACE: Schema = Schema {
    name: "trace",
    columns: &[
        ("gamma_tilde", Kind::Float),
        ("branch_id", Kind::Count),
        ("re_E", Kind::Float),
        ("im_E", Kind::Float),
        ("tracking_reliable", Kind::Bool),
    ],
};

pub const INVENTORY: Schema = Schema {
    name: "localized_inventory",
    columns: &[
        ("family_generation", Kind::Count),
        ("root_site_id", Kind::Count),
        ("mode", Kind::Count),
        ("re_E", Kind::Float),
        ("im_E", Kind::Float),
        ("support_size", Kind::Count),
    ],
};

pub const EXTENDED: Schema = Schema {
    name: "extended",
    columns: &[
        ("state_id", Kind::Count),
        ("re_E", Kind::Float),
        ("im_E", Kind::Float),
        ("residual", Kind::Float),
    ],
};

pub const ORACLE: Schema = Schema {
    name: "oracle",
    columns: &[
        ("index", Kind::Count),
        ("re_E", Kind::Float),
        ("im_E", Kind::Float),
        ("source", Kind::Label(&["localized", "extended"])),
        ("match_distance", Kind::Float),
    ],
};

pub const SWEEP: Schema = Schema {
    name: "current_sweep",
    columns: &[
        ("gamma_tilde", Kind::Float),
        ("state_id", Kind::Count),
        ("phase", Kind::Label(PHASES)),
        ("J_av", Kind::Float),
    ],
};

pub const SWEEP_BY_N: Schema = Schema {
    name: "current_sweep_by_N",
    columns: &[
        ("N", Kind::Count),
        ("gamma_tilde", Kind::Float),
        ("state_id", Kind::Count),
        ("phase", Kind::Label(PHASES)),
        ("J_av", Kind::Float),
    ],
};

pub const PROFILES: Schema = Schema {
    name: "current_profiles",
    columns: &[
        ("gamma_tilde", Kind::Float),
        ("state_id", Kind::Count),
        ("phase", Kind::Label(PHASES)),
        ("ell", Kind::Count),
        ("J", Kind::Float),
    ],
};

pub const SAMPLES: Schema = Schema {
    name: "ensemble_samples",
    columns: &[
        ("delta", Kind::Float),
        ("sample_id", Kind::Count),
        ("gamma_ep", Kind::Float),
        ("E_ep_re", Kind::Float),
        ("E_ep_im", Kind::Float),
        ("ep_side", Kind::Int),
        ("ep_gap", Kind::Float),
        ("gamma_zero", Kind::OptFloat),
        ("gamma_maxJ", Kind::Float),
        ("maxJ", Kind::Float),
        ("maxJ_state", Kind::Count),
    ],
};

pub const AGGREGATES: Schema = Schema {
    name: "ensemble_aggregates",
    columns: &[
        ("delta", Kind::Float),
        ("n_samples", Kind::Count),
        ("n_failed", Kind::Count),
        ("gamma_ep_mean", Kind::Float),
        ("gamma_ep_std", Kind::Float),
        ("gamma_zero_mean", Kind::OptFloat),
        ("gamma_zero_std", Kind::OptFloat),
        ("gamma_maxJ_mean", Kind::Float),
        ("gamma_maxJ_std", Kind::Float),
    ],
};

pub const SCATTER: Schema = Schema {
    name: "scatter",
    columns: &[
        ("E", Kind::Float),
        ("gamma", Kind::Float),
        ("T", Kind::Float),
        ("T_closed_form", Kind::Float),
    ],
};

pub const SUBBRANCH: Schema = Schema {
    name: "subbranch_eigenvalues",
    columns: &[
        ("n", Kind::Count),
        ("gamma_N", Kind::Float),
        ("root_id", Kind::Count),
        ("re_E", Kind::Float),
        ("im_E", Kind::Float),
    ],
};

pub const SECULAR_F: Schema = Schema {
    name: "secular_function",
    columns: &[("N", Kind::Count), ("k", Kind::Float), ("f", Kind::Float)],
};

pub const EIGENFUNCTIONS: Schema = Schema {
    name: "eigenfunctions",
    columns: &[
        ("gamma_tilde", Kind::Float),
        ("state_id", Kind::Count),
        ("phase", Kind::Label(PHASES)),
        ("ell", Kind::Count),
        ("re_psi", Kind::Float),
        ("im_psi", Kind::Float),
    ],
};

pub const BRANCH_CURRENTS: Schema = Schema {
    name: "branch_currents",
    columns: &[
        ("gamma_tilde", Kind::Float),
        ("branch_id", Kind::Count),
        ("J_av", Kind::Float),
    ],
};

pub const ALL: &[Schema] = &[
    INVENTORY,
    EXTENDED,
    ORACLE,
    ROOTS,
    ROOTS_BY_N,
    SWEEP,
    SWEEP_BY_N,
    PROFILES,
    TRACE,
    SAMPLES,
    AGGREGATES,
    SCATTER,
    SUBBRANCH,
    SECULAR_F,
    EIGENFUNCTIONS,
    BRANCH_CURRENTS,
];

/// Checks header names, field counts and field kinds.
pub fn validate(schema: &Schema, bytes: &[u8]) -> Result<usize> {
    let fail = |reason: String| Error::Schema {
        table: schema.name.to_string(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = reader.headers()?.clone();
    let expected: Vec<&str> = schema.columns.iter().map(|c| c.0).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(fail(format!(
            "header {:?}, expected {:?}",
            header.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(format!("row {}: {e}", i + 1)))?;
        for (field, (name, kind)) in record.iter().zip(schema.columns) {
            if !kind.accepts(field) {
                return Err(fail(format!(
                    "row {}: column {name} = {field:?} is not {}",
                    i + 1,
                    kind.describe()
                )));
            }
        }
        rows += 1;
    }
    Ok(rows)
}

/// Renders a table with `render`, validates it and writes it to `path`.
pub fn write_table<F>(path: &Path, schema: &Schema, render: F) -> Result<usize>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    render(&mut buf)?;
    let rows = validate(schema, &buf)?;
    std::fs::write(path, &buf)?;
    Ok(rows)
}

/// Markdown reference for every schema.
pub fn markdown() -> String {
    let mut s = String::new();
    for schema in ALL {
        s.push_str(&format!("### `{}`\n\n| column | type |\n|---|---|\n", schema.name));
        for (name, kind) in schema.columns {
            s.push_str(&format!("| `{name}` | {} |\n", kind.describe()));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_well_formed() {
        let csv = "E,gamma,T,T_closed_form\n0.1,0.5,1.2,1.2\n-0.3,1e-3,NaN,inf\n";
        assert_eq!(validate(&SCATTER, csv.as_bytes()).unwrap(), 2);
    }

    #[test]
    fn rejects_bad_header_and_fields() {
        assert!(validate(&SCATTER, b"E,gamma,T\n1,2,3\n").is_err());
        assert!(validate(&SCATTER, b"E,gamma,T,T_closed_form\n1,2,x,3\n").is_err());
        assert!(validate(&SCATTER, b"E,gamma,T,T_closed_form\n1,2,3\n").is_err());
        let trace = "gamma_tilde,branch_id,re_E,im_E,tracking_reliable\n1,-1,0,0,true\n";
        assert!(validate(&TRACE, trace.as_bytes()).is_err());
        let roots = "gamma_tilde,k_re,k_im,E_re,E_im,phase\n1,0,0,0,0,broken\n";
        assert!(validate(&ROOTS, roots.as_bytes()).is_err());
    }

    #[test]
    fn schema_names_unique() {
        let mut names: Vec<&str> = ALL.iter().map(|s| s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), ALL.len());
    }
}
