use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Manifest;
use crate::error::{Error, Result};
use crate::table::{csv_field, render_grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Race {
    White,
    Black,
    Indian,
    Asian,
    Others,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgeBucket {
    #[serde(rename = "0-9")]
    Under10,
    #[serde(rename = "10s")]
    Teens,
    #[serde(rename = "20s")]
    Twenties,
    #[serde(rename = "30s")]
    Thirties,
    #[serde(rename = "40s")]
    Forties,
    #[serde(rename = "50s")]
    Fifties,
    #[serde(rename = "60s")]
    Sixties,
    #[serde(rename = "70+")]
    Over70,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Male, Gender::Female];
    pub const TITLES: [&'static str; 2] = ["Male", "Female"];
}

impl Race {
    pub const ALL: [Race; 5] = [
        Race::White,
        Race::Black,
        Race::Indian,
        Race::Asian,
        Race::Others,
    ];
    pub const TITLES: [&'static str; 5] = ["White", "Black", "Indian", "Asian", "Others"];
}

impl AgeBucket {
    pub const ALL: [AgeBucket; 8] = [
        AgeBucket::Under10,
        AgeBucket::Teens,
        AgeBucket::Twenties,
        AgeBucket::Thirties,
        AgeBucket::Forties,
        AgeBucket::Fifties,
        AgeBucket::Sixties,
        AgeBucket::Over70,
    ];
    pub const TITLES: [&'static str; 8] = ["0-9", "10s", "20s", "30s", "40s", "50s", "60s", "70+"];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeRecord {
    pub image_id: String,
    pub gender: Gender,
    pub race: Race,
    pub age_bucket: AgeBucket,
}

pub const ATTRIBUTE_HEADER: [&str; 4] = ["image_id", "gender", "race", "age_bucket"];

pub type Attributes = BTreeMap<String, AttributeRecord>;

pub fn load_attributes(path: impl AsRef<Path>) -> Result<Attributes> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if header.iter().ne(ATTRIBUTE_HEADER) {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {}", ATTRIBUTE_HEADER.join(",")),
        ));
    }
    let mut out = Attributes::new();
    for (i, row) in r.deserialize::<AttributeRecord>().enumerate() {
        let rec = row.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        if out.contains_key(&rec.image_id) {
            return Err(Error::parse(
                path,
                i + 2,
                format!("duplicate image_id `{}`", rec.image_id),
            ));
        }
        out.insert(rec.image_id.clone(), rec);
    }
    Ok(out)
}

pub fn write_attributes(attrs: &Attributes, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if attrs.is_empty() {
        w.write_record(ATTRIBUTE_HEADER)
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    for rec in attrs.values() {
        w.serialize(rec)
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    crate::dataset::write_file(path.as_ref(), &bytes)
}

/// Counts per category; each axis sums to `total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DemographicTally {
    pub total: u64,
    pub gender: [u64; 2],
    pub race: [u64; 5],
    pub age: [u64; 8],
}

impl DemographicTally {
    pub fn add(&mut self, rec: &AttributeRecord) {
        self.total += 1;
        self.gender[rec.gender as usize] += 1;
        self.race[rec.race as usize] += 1;
        self.age[rec.age_bucket as usize] += 1;
    }

    fn column(&self) -> Vec<u64> {
        let mut v = vec![self.total];
        v.extend(self.gender);
        v.extend(self.race);
        v.extend(self.age);
        v
    }
}

/// Tallies the attributes of every record in `manifest`.
pub fn tally_attributes(manifest: &Manifest, attrs: &Attributes) -> Result<DemographicTally> {
    let mut t = DemographicTally::default();
    for r in manifest.iter() {
        let rec = attrs
            .get(&r.image_id)
            .ok_or_else(|| Error::invalid(format!("no attribute record for `{}`", r.image_id)))?;
        t.add(rec);
    }
    Ok(t)
}

fn row_labels() -> Vec<String> {
    let mut labels = vec!["Total".to_string()];
    labels.extend(Gender::TITLES.iter().map(|t| format!("Gender {t}")));
    labels.extend(Race::TITLES.iter().map(|t| format!("Race {t}")));
    labels.extend(AgeBucket::TITLES.iter().map(|t| format!("Age {t}")));
    labels
}

/// `35795` -> `35,795`.
pub fn with_thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// One column per dataset, rows grouped by axis.
pub fn render_demographics(columns: &[(String, DemographicTally)]) -> String {
    let titles: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
    let cols: Vec<Vec<u64>> = columns.iter().map(|(_, t)| t.column()).collect();
    let labels = row_labels();
    let cells: Vec<Vec<String>> = (0..labels.len())
        .map(|i| cols.iter().map(|c| with_thousands(c[i])).collect())
        .collect();
    render_grid("Category", &titles, &labels, &cells)
}

pub fn demographics_csv(columns: &[(String, DemographicTally)]) -> String {
    let mut out = String::from("category");
    for (name, _) in columns {
        write!(out, ",{}", csv_field(name)).unwrap();
    }
    out.push('\n');
    let cols: Vec<Vec<u64>> = columns.iter().map(|(_, t)| t.column()).collect();
    for (i, label) in row_labels().iter().enumerate() {
        out.push_str(label);
        for c in &cols {
            write!(out, ",{}", c[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ClassLabel, ImageRecord, Split};

    fn fixture(n: usize, male: usize) -> (Manifest, Attributes) {
        let mut records = Vec::new();
        let mut attrs = Attributes::new();
        for i in 0..n {
            let id = format!("f{i}");
            records.push(ImageRecord::new(
                &id,
                "p",
                "s",
                ClassLabel::Neutral,
                Split::Train,
            ));
            let rec = AttributeRecord {
                image_id: id.clone(),
                gender: if i < male {
                    Gender::Male
                } else {
                    Gender::Female
                },
                race: Race::ALL[i % 5],
                age_bucket: AgeBucket::ALL[i % 8],
            };
            attrs.insert(id, rec);
        }
        (Manifest::new(records).unwrap(), attrs)
    }

    #[test]
    fn ten_records_six_male() {
        let (m, a) = fixture(10, 6);
        let t = tally_attributes(&m, &a).unwrap();
        assert_eq!(t.gender, [6, 4]);
        assert_eq!(t.race.iter().sum::<u64>(), 10);
        assert_eq!(t.age.iter().sum::<u64>(), 10);
    }

    #[test]
    fn missing_attribute_fails() {
        let (m, mut a) = fixture(3, 1);
        a.remove("f1");
        assert!(tally_attributes(&m, &a).is_err());
    }

    #[test]
    fn csv_round_trip_and_values() {
        let (_, a) = fixture(9, 4);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("attrs.csv");
        write_attributes(&a, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(
            text.starts_with("image_id,gender,race,age_bucket\nf0,male,White,0-9\n"),
            "{text}"
        );
        assert!(text.contains("f7,female,Indian,70+\n"));
        assert_eq!(load_attributes(&p).unwrap(), a);
        std::fs::write(&p, "image_id,gender,race,age_bucket\nx,male,Latino,20s\n").unwrap();
        assert!(load_attributes(&p).is_err());
    }

    #[test]
    fn thousands() {
        assert_eq!(with_thousands(0), "0");
        assert_eq!(with_thousands(169), "169");
        assert_eq!(with_thousands(35_795), "35,795");
        assert_eq!(with_thousands(1_234_567), "1,234,567");
    }
}
