use std::path::Path;
use std::sync::OnceLock;

use super::NetError;

/// One MCS record: modulation order (bits/symbol) and code rate numerator
/// over 1024.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McsEntry {
    pub index: u8,
    pub modulation_order: u8,
    pub code_rate_x1024: u16,
}

impl McsEntry {
    pub fn code_rate(&self) -> f64 {
        f64::from(self.code_rate_x1024) / 1024.0
    }
}

/// MCS index → (modulation order, code rate) lookup table.
///
/// The bundled 64-QAM table ships as `data/mcs_qam64.csv`; alternative tables
/// can be loaded from a file with the same record layout
/// (`index,modulation_order,code_rate_x1024`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

static BUNDLED: OnceLock<McsTable> = OnceLock::new();

impl McsTable {
    /// The bundled 64-QAM table.
    pub fn bundled() -> &'static McsTable {
        BUNDLED.get_or_init(|| {
            McsTable::parse(include_str!("../../data/mcs_qam64.csv"))
                .expect("bundled MCS table is well-formed")
        })
    }

    /// Parses CSV text with a `index,modulation_order,code_rate_x1024` header.
    pub fn parse(text: &str) -> Result<Self, NetError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 0 && line.starts_with("index") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(NetError::McsParse {
                    line: lineno + 1,
                    reason: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let parse_u16 = |s: &str, what: &str| {
                s.parse::<u16>().map_err(|e| NetError::McsParse {
                    line: lineno + 1,
                    reason: format!("bad {what} \"{s}\": {e}"),
                })
            };
            let index = parse_u16(fields[0], "index")? as u8;
            let modulation_order = parse_u16(fields[1], "modulation order")? as u8;
            let code_rate_x1024 = parse_u16(fields[2], "code rate")?;
            if modulation_order == 0 || code_rate_x1024 == 0 || code_rate_x1024 >= 1024 {
                return Err(NetError::McsParse {
                    line: lineno + 1,
                    reason: "modulation order must be positive and code rate in (0, 1024)".into(),
                });
            }
            entries.push(McsEntry { index, modulation_order, code_rate_x1024 });
        }
        if entries.is_empty() {
            return Err(NetError::McsParse { line: 0, reason: "table has no entries".into() });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn lookup(&self, index: u8) -> Result<&McsEntry, NetError> {
        self.entries
            .iter()
            .find(|e| e.index == index)
            .ok_or(NetError::UnknownMcs(index))
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }
}
