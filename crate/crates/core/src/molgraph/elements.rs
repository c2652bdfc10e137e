//! Periodic-table data: symbols, conventional standard atomic weights and default valences.

/// Mass of one folded hydrogen, in daltons.
pub const HYDROGEN_MASS: f64 = 1.008;

// (symbol, standard atomic weight). Radioactive elements without a standard
// weight carry the mass number of their longest-lived isotope.
const ELEMENTS: &[(&str, f64)] = &[
    ("H", 1.008), ("He", 4.0026), ("Li", 6.94), ("Be", 9.0122), ("B", 10.81),
    ("C", 12.011), ("N", 14.007), ("O", 15.999), ("F", 18.998), ("Ne", 20.180),
    ("Na", 22.990), ("Mg", 24.305), ("Al", 26.982), ("Si", 28.085), ("P", 30.974),
    ("S", 32.06), ("Cl", 35.45), ("Ar", 39.95), ("K", 39.098), ("Ca", 40.078),
    ("Sc", 44.956), ("Ti", 47.867), ("V", 50.942), ("Cr", 51.996), ("Mn", 54.938),
    ("Fe", 55.845), ("Co", 58.933), ("Ni", 58.693), ("Cu", 63.546), ("Zn", 65.38),
    ("Ga", 69.723), ("Ge", 72.630), ("As", 74.922), ("Se", 78.971), ("Br", 79.904),
    ("Kr", 83.798), ("Rb", 85.468), ("Sr", 87.62), ("Y", 88.906), ("Zr", 91.224),
    ("Nb", 92.906), ("Mo", 95.95), ("Tc", 98.0), ("Ru", 101.07), ("Rh", 102.91),
    ("Pd", 106.42), ("Ag", 107.87), ("Cd", 112.41), ("In", 114.82), ("Sn", 118.71),
    ("Sb", 121.76), ("Te", 127.60), ("I", 126.90), ("Xe", 131.29), ("Cs", 132.91),
    ("Ba", 137.33), ("La", 138.91), ("Ce", 140.12), ("Pr", 140.91), ("Nd", 144.24),
    ("Pm", 145.0), ("Sm", 150.36), ("Eu", 151.96), ("Gd", 157.25), ("Tb", 158.93),
    ("Dy", 162.50), ("Ho", 164.93), ("Er", 167.26), ("Tm", 168.93), ("Yb", 173.05),
    ("Lu", 174.97), ("Hf", 178.49), ("Ta", 180.95), ("W", 183.84), ("Re", 186.21),
    ("Os", 190.23), ("Ir", 192.22), ("Pt", 195.08), ("Au", 196.97), ("Hg", 200.59),
    ("Tl", 204.38), ("Pb", 207.2), ("Bi", 208.98), ("Po", 209.0), ("At", 210.0),
    ("Rn", 222.0), ("Fr", 223.0), ("Ra", 226.0), ("Ac", 227.0), ("Th", 232.04),
    ("Pa", 231.04), ("U", 238.03), ("Np", 237.0), ("Pu", 244.0), ("Am", 243.0),
    ("Cm", 247.0), ("Bk", 247.0), ("Cf", 251.0), ("Es", 252.0), ("Fm", 257.0),
    ("Md", 258.0), ("No", 259.0), ("Lr", 266.0), ("Rf", 267.0), ("Db", 268.0),
    ("Sg", 269.0), ("Bh", 270.0), ("Hs", 277.0), ("Mt", 278.0), ("Ds", 281.0),
    ("Rg", 282.0), ("Cn", 285.0), ("Nh", 286.0), ("Fl", 289.0), ("Mc", 290.0),
    ("Lv", 293.0), ("Ts", 294.0), ("Og", 294.0),
];

// Average residue masses (amino acid minus water), in daltons.
const RESIDUES: &[(char, f64)] = &[
    ('A', 71.0788), ('R', 156.1875), ('N', 114.1038), ('D', 115.0886), ('C', 103.1388),
    ('E', 129.1155), ('Q', 128.1307), ('G', 57.0519), ('H', 137.1411), ('I', 113.1594),
    ('L', 113.1594), ('K', 128.1741), ('M', 131.1926), ('F', 147.1766), ('P', 97.1167),
    ('S', 87.0782), ('T', 101.1051), ('W', 186.2132), ('Y', 163.1760), ('V', 99.1326),
];

pub fn is_element(symbol: &str) -> bool {
    ELEMENTS.iter().any(|(s, _)| *s == symbol)
}

pub fn atomic_mass(symbol: &str) -> Option<f64> {
    ELEMENTS.iter().find(|(s, _)| *s == symbol).map(|(_, m)| *m)
}

pub fn is_amino_acid(code: char) -> bool {
    RESIDUES.iter().any(|(c, _)| *c == code)
}

pub fn residue_mass(code: char) -> Option<f64> {
    RESIDUES.iter().find(|(c, _)| *c == code).map(|(_, m)| *m)
}

/// Allowed valences used to derive implicit hydrogens for uncharged atoms.
pub fn default_valences(symbol: &str) -> &'static [u8] {
    match symbol {
        "B" => &[3],
        "C" => &[4],
        "N" => &[3, 5],
        "O" => &[2],
        "P" => &[3, 5],
        "S" => &[2, 4, 6],
        "F" | "Cl" | "Br" | "I" => &[1],
        _ => &[],
    }
}

/// Implicit hydrogen count from the valence model.
///
/// `bond_sum` counts aromatic bonds as 1; aromatic atoms then donate one
/// further valence unit to the ring system. Charge shifts the valence of
/// pnictogens and chalcogens up and of boron and carbon down.
pub fn implicit_hydrogens(symbol: &str, aromatic: bool, charge: i8, bond_sum: u32) -> u8 {
    let valences = default_valences(symbol);
    if valences.is_empty() {
        return 0;
    }
    let shift = |v: u8| -> i32 {
        let v = v as i32;
        let c = charge as i32;
        match symbol {
            "N" | "P" | "O" | "S" => v + c,
            "B" | "C" => v - c.abs(),
            _ => v - c.abs(),
        }
    };
    let used = bond_sum as i32;
    let target = valences
        .iter()
        .map(|&v| shift(v))
        .find(|&v| v >= used)
        .unwrap_or(used);
    let h = target - used - i32::from(aromatic);
    h.clamp(0, u8::MAX as i32) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert_eq!(atomic_mass("C"), Some(12.011));
        assert_eq!(atomic_mass("O"), Some(15.999));
        assert!(atomic_mass("Xx").is_none());
        assert!(is_element("Cl"));
        assert!(!is_element("cl"));
        assert_eq!(ELEMENTS.len(), 118);
        assert_eq!(RESIDUES.len(), 20);
        assert!(is_amino_acid('W'));
        assert!(!is_amino_acid('B'));
    }

    #[test]
    fn implicit_h_counts() {
        assert_eq!(implicit_hydrogens("C", false, 0, 0), 4);
        assert_eq!(implicit_hydrogens("C", false, 0, 2), 2);
        assert_eq!(implicit_hydrogens("N", false, 0, 3), 0);
        assert_eq!(implicit_hydrogens("N", false, 0, 4), 1);
        assert_eq!(implicit_hydrogens("N", false, 1, 3), 1);
        assert_eq!(implicit_hydrogens("O", false, -1, 1), 0);
        assert_eq!(implicit_hydrogens("S", false, 0, 3), 1);
        // benzene carbon, pyridine nitrogen, thiophene sulfur
        assert_eq!(implicit_hydrogens("C", true, 0, 2), 1);
        assert_eq!(implicit_hydrogens("N", true, 0, 2), 0);
        assert_eq!(implicit_hydrogens("S", true, 0, 2), 0);
        assert_eq!(implicit_hydrogens("Fe", false, 0, 0), 0);
    }
}
