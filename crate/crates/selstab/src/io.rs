//! Text formats: curve coefficient lists, comma lists, curve-list CSV and
//! group table files.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use selstab_core::curve::CurveQ;
use selstab_core::groups::{center, GroupTable};

use crate::error::{input, CliError};

/// `"a1,a2,a3,a4,a6"`.
pub fn parse_curve(s: &str) -> Result<CurveQ, CliError> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input(format!("curve {s:?}: expected five integers a1,a2,a3,a4,a6")))?;
    let coeffs: [i64; 5] = parts
        .try_into()
        .map_err(|_| input(format!("curve {s:?}: expected exactly five coefficients")))?;
    Ok(CurveQ::new(coeffs)?)
}

/// Comma-separated unsigned integers; empty string gives an empty list.
pub fn parse_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<u64>().map_err(|_| input(format!("not a nonnegative integer: {x:?}"))))
        .collect()
}

pub fn parse_set(s: &str) -> Result<BTreeSet<u64>, CliError> {
    Ok(parse_list(s)?.into_iter().collect())
}

/// `"v:e,v:e"` pairs.
pub fn parse_pairs(s: &str) -> Result<Vec<(u64, u64)>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|item| {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| input(format!("expected v:c, got {item:?}")))?;
            let a = a.trim().parse().map_err(|_| input(format!("bad integer in {item:?}")))?;
            let b = b.trim().parse().map_err(|_| input(format!("bad integer in {item:?}")))?;
            Ok((a, b))
        })
        .collect()
}

/// `"2^1*5^3"`; a bare `v` means exponent 1.
pub fn parse_product(s: &str) -> Result<Vec<(u64, u64)>, CliError> {
    s.split('*')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|f| {
            let (v, e) = f.split_once('^').unwrap_or((f, "1"));
            let v = v.trim().parse().map_err(|_| input(format!("bad base in {f:?}")))?;
            let e = e.trim().parse().map_err(|_| input(format!("bad exponent in {f:?}")))?;
            Ok((v, e))
        })
        .collect()
}

#[derive(Debug, serde::Deserialize)]
struct CurveRow {
    label: String,
    a1: i64,
    a2: i64,
    a3: i64,
    a4: i64,
    a6: i64,
}

/// CSV with header `label,a1,a2,a3,a4,a6`.
pub fn read_curve_list(path: &Path) -> Result<Vec<(String, CurveQ)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: CurveRow = row?;
        out.push((r.label, CurveQ::new([r.a1, r.a2, r.a3, r.a4, r.a6])?));
    }
    Ok(out)
}

pub fn read_group_table(path: &Path, ell: Option<u64>) -> Result<GroupTable, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(GroupTable::from_text(&text, ell)?)
}

pub fn write_group_table(path: &Path, g: &GroupTable) -> Result<(), CliError> {
    fs::write(path, g.to_text())?;
    Ok(())
}

/// A table file, or a built-in `cyclic:<ell>^<k>`, `elementary:<ell>^<r>`,
/// `heisenberg:<ell>`.
pub fn load_group(spec: &str, ell: Option<u64>) -> Result<GroupTable, CliError> {
    let builtin = |kind: &str, rest: &str| -> Result<GroupTable, CliError> {
        let (p, k) = rest.split_once('^').unwrap_or((rest, "1"));
        let p: u64 = p.parse().map_err(|_| input(format!("bad prime in {spec:?}")))?;
        let k: u32 = k.parse().map_err(|_| input(format!("bad exponent in {spec:?}")))?;
        if ell.is_some_and(|l| l != p) {
            return Err(input(format!("{spec:?} is not a {}-group", ell.unwrap())));
        }
        Ok(match kind {
            "cyclic" => GroupTable::cyclic_ell(p, k)?,
            "elementary" => GroupTable::elementary_abelian(p, k)?,
            "heisenberg" => GroupTable::heisenberg(p)?,
            _ => unreachable!(),
        })
    };
    match spec.split_once(':') {
        Some((kind @ ("cyclic" | "elementary" | "heisenberg"), rest)) => builtin(kind, rest),
        _ => read_group_table(Path::new(spec), ell),
    }
}

/// Lowest-index central element of order ℓ.
pub fn default_kernel_generator(g: &GroupTable, ell: u64) -> Result<usize, CliError> {
    center(g)
        .into_iter()
        .find(|&z| z != 0 && g.element_order(z) == ell)
        .ok_or_else(|| input("group has no central element of order ell"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_products() {
        assert_eq!(parse_list("11, 31,41").unwrap(), vec![11, 31, 41]);
        assert!(parse_list("").unwrap().is_empty());
        assert!(parse_list("11,x").is_err());
        assert_eq!(parse_pairs("2:1,5:3").unwrap(), vec![(2, 1), (5, 3)]);
        assert_eq!(parse_product("2^1*5^3*7").unwrap(), vec![(2, 1), (5, 3), (7, 1)]);
    }

    #[test]
    fn curves() {
        assert_eq!(parse_curve("0,0,0,1,1").unwrap().key(), "0.0.0.1.1");
        assert!(parse_curve("0,0,1,1").is_err());
        assert!(parse_curve("0,0,0,0,0").is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("curves.csv");
        fs::write(&p, "label,a1,a2,a3,a4,a6\nE1, 0,0,0,1,1\n11a1,0,-1,1,-10,-20\n").unwrap();
        let list = read_curve_list(&p).unwrap();
        assert_eq!(list.len(), 2);
        assert_eq!(list[1].0, "11a1");
    }

    #[test]
    fn group_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("heis.txt");
        let h = GroupTable::heisenberg(3).unwrap();
        write_group_table(&p, &h).unwrap();
        assert_eq!(load_group(p.to_str().unwrap(), Some(3)).unwrap(), h);
        assert_eq!(load_group("heisenberg:3", None).unwrap(), h);
        assert_eq!(load_group("cyclic:5^2", Some(5)).unwrap().order(), 25);
        assert!(load_group("cyclic:5^2", Some(3)).is_err());
        let z = default_kernel_generator(&h, 3).unwrap();
        assert_eq!(h.element_order(z), 3);
    }
}
