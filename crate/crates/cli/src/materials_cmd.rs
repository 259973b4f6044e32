//! `pairgen materials list`.

use std::io::Write;
use std::path::Path;

use pairgen_core::materials::{load_material_db, MaterialDb};

/// Environment variable naming the default material database.
pub const MATERIALS_ENV: &str = "PAIRGEN_MATERIALS";

const SHIPPED: &str = include_str!("../../../data/materials.json");

/// Opens `path`, else the file named by `PAIRGEN_MATERIALS`, else the
/// database compiled into the binary.
pub fn open_db(path: Option<&Path>) -> pairgen_core::Result<MaterialDb> {
    if let Some(p) = path {
        return load_material_db(p);
    }
    match std::env::var_os(MATERIALS_ENV) {
        Some(p) if !p.is_empty() => load_material_db(p),
        _ => MaterialDb::from_json_str(SHIPPED, "<shipped materials>"),
    }
}

/// Writes one row per material: name, validity range and dispersion branches.
pub fn list_materials(db: &MaterialDb, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "name\tvalidity_um\tpolarizations")?;
    for m in db.iter() {
        let pols: Vec<String> = m.polarizations().iter().map(|p| p.to_string()).collect();
        let pols = if pols.is_empty() {
            "-".to_string()
        } else {
            pols.join(",")
        };
        writeln!(out, "{}\t{}-{}\t{}", m.name, m.validity_um[0], m.validity_um[1], pols)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_db_lists_four_rows() {
        let db = MaterialDb::from_json_str(SHIPPED, "shipped").unwrap();
        let mut buf = Vec::new();
        list_materials(&db, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("BBO\t0.2-2.6\te,o") || text.contains("BBO\t0.2-2.6\to,e"));
    }

    #[test]
    fn empty_db_lists_header_only() {
        let db = MaterialDb::from_json_str("", "empty").unwrap();
        let mut buf = Vec::new();
        list_materials(&db, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }
}
