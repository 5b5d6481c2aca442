//! Seeded generator for the bundled fixture dataset, query set and labels.
//!
//! The same seed always produces byte-identical files. Labels are computed by
//! filtering the generated records directly, without the graph or query
//! engine.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{GeoPoint, Weekday};
use crate::ingest::{Gender, ProviderRecord, RawInterval, SpecialtyRecord};
use crate::nl::{LexiconEntry, SlotType, NEAR_ME};
use crate::text::normalize;

pub const DEFAULT_SEED: u64 = 20_240_501;
pub const PROVIDER_COUNT: usize = 220;
pub const QUERY_COUNT: usize = 100;

/// (name, synonyms). The first synonym is the practitioner noun; later ones
/// are lay phrasings.
const SPECIALTIES: &[(&str, &[&str])] = &[
    ("Pediatrics", &["pediatrician", "kids doctor", "childrens doctor", "baby doctor"]),
    ("Cardiology", &["cardiologist", "heart doctor", "heart specialist"]),
    ("Dermatology", &["dermatologist", "skin doctor", "acne specialist"]),
    ("Obstetrics and Gynecology", &["obgyn", "gynecologist", "obstetrician", "pregnancy doctor"]),
    ("Orthopedics", &["orthopedist", "bone doctor", "broken bone specialist"]),
    ("Ophthalmology", &["ophthalmologist", "eye doctor", "eye specialist"]),
    ("Otolaryngology", &["otolaryngologist", "ear nose and throat doctor", "ent doctor"]),
    ("Psychiatry", &["psychiatrist", "shrink"]),
    ("Neurology", &["neurologist", "brain doctor", "nerve specialist"]),
    ("Gastroenterology", &["gastroenterologist", "stomach doctor", "gut specialist"]),
    ("Endocrinology", &["endocrinologist", "diabetes doctor", "thyroid doctor"]),
    ("Oncology", &["oncologist", "cancer doctor", "tumor specialist"]),
    ("Urology", &["urologist", "bladder doctor", "prostate specialist"]),
    ("Nephrology", &["nephrologist", "kidney doctor"]),
    ("Pulmonology", &["pulmonologist", "lung doctor", "asthma specialist"]),
    ("Rheumatology", &["rheumatologist", "arthritis doctor", "joint pain specialist"]),
    ("Allergy and Immunology", &["allergist", "allergy doctor"]),
    ("Family Medicine", &["family physician", "primary care doctor", "gp"]),
    ("Internal Medicine", &["internist", "adult primary care"]),
    ("Geriatrics", &["geriatrician", "elderly care doctor", "senior doctor"]),
    ("General Surgery", &["general surgeon", "surgeon"]),
    ("Podiatry", &["podiatrist", "foot doctor"]),
    ("Physical Therapy", &["physical therapist", "physio", "rehab specialist"]),
    ("Psychology", &["psychologist", "counselor", "talk therapy"]),
    ("Optometry", &["optometrist", "vision exam", "eyeglasses exam"]),
    ("Dentistry", &["dentist", "tooth doctor", "teeth cleaning"]),
    ("Infectious Disease", &["infectious disease specialist", "infection doctor"]),
    ("Plastic Surgery", &["plastic surgeon", "cosmetic surgeon"]),
    ("Sports Medicine", &["sports physician", "athlete doctor"]),
    ("Hematology", &["hematologist", "blood doctor"]),
    ("Audiology", &["audiologist", "hearing doctor"]),
    ("Sleep Medicine", &["sleep specialist", "insomnia doctor"]),
    ("Vascular Surgery", &["vascular surgeon", "vein doctor"]),
    ("Anesthesiology", &["anesthesiologist", "pain management doctor"]),
    ("Nutrition", &["nutritionist", "dietitian", "diet coach"]),
];

/// (city, lat, lon, street names used for the second location).
const CITIES: &[(&str, f64, f64, &str)] = &[
    ("Los Angeles", 34.0522, -118.2437, "Sunset"),
    ("Pasadena", 34.1478, -118.1445, "Colorado"),
    ("Glendale", 34.1425, -118.2551, "Brand"),
    ("Burbank", 34.1808, -118.3090, "Olive"),
    ("Santa Monica", 34.0195, -118.4912, "Wilshire"),
    ("Long Beach", 33.7701, -118.1937, "Atlantic"),
    ("Torrance", 33.8358, -118.3406, "Hawthorne"),
    ("Inglewood", 33.9617, -118.3531, "Manchester"),
    ("Downey", 33.9401, -118.1332, "Firestone"),
    ("Whittier", 33.9792, -118.0328, "Greenleaf"),
    ("West Covina", 34.0686, -117.9390, "Azusa"),
    ("Alhambra", 34.0953, -118.1270, "Garfield"),
];

const DEPARTMENTS: &[&str] = &["Pharmacy", "Radiology", "Laboratory", "Imaging", "Emergency", "Vaccinations"];

const FEMALE_NAMES: &[&str] = &[
    "Maria", "Jennifer", "Linda", "Susan", "Karen", "Lisa", "Nancy", "Sandra", "Emily", "Michelle",
    "Laura", "Rachel", "Grace", "Olivia", "Sofia", "Mei", "Priya", "Aisha", "Elena", "Hannah",
];
const MALE_NAMES: &[&str] = &[
    "James", "Robert", "Michael", "David", "Daniel", "Joseph", "Thomas", "Kevin", "Brian", "Jason",
    "Eric", "Steven", "Andrew", "Omar", "Raj", "Minh", "Carlos", "Luis", "Samuel", "Peter",
];
const LAST_NAMES: &[&str] = &[
    "Gonzalez", "Nguyen", "Kim", "Patel", "Smith", "Johnson", "Garcia", "Lee", "Chen", "Martinez",
    "Brown", "Davis", "Lopez", "Wilson", "Anderson", "Hernandez", "Tran", "Wong", "Rivera", "Shah",
    "Cohen", "Flores", "Ramirez", "Sato", "Ivanova", "Hakobyan", "Rahimi", "Santos", "Mendoza", "Okafor",
];

/// Second languages, with Spanish weighted up.
const EXTRA_LANGUAGES: &[&str] = &["es", "es", "es", "zh", "ko", "vi", "tl", "hy", "fa", "ru"];

const LANGUAGE_SURFACES: &[(&str, &str)] = &[
    ("spanish", "es"),
    ("chinese", "zh"),
    ("mandarin", "zh"),
    ("cantonese", "zh"),
    ("korean", "ko"),
    ("vietnamese", "vi"),
    ("tagalog", "tl"),
    ("armenian", "hy"),
    ("farsi", "fa"),
    ("persian", "fa"),
    ("russian", "ru"),
];

const TEMPORAL_SURFACES: &[(&str, &str)] = &[
    ("weekend", "WEEKEND"),
    ("saturday", "Saturday"),
    ("sunday", "Sunday"),
    ("evening", "EVENING"),
    ("tonight", "EVENING"),
    ("after work", "EVENING"),
    ("late", "EVENING"),
    ("weekday", "WEEKDAY"),
];

const OTHER_LEXICON: &[(&str, SlotType, &str)] = &[
    ("near me", SlotType::Geo, NEAR_ME),
    ("nearby", SlotType::Geo, NEAR_ME),
    ("close to me", SlotType::Geo, NEAR_ME),
    ("closest", SlotType::Geo, NEAR_ME),
    ("nearest", SlotType::Geo, NEAR_ME),
    ("around here", SlotType::Geo, NEAR_ME),
    ("female", SlotType::Gender, "F"),
    ("woman", SlotType::Gender, "F"),
    ("male", SlotType::Gender, "M"),
    ("man", SlotType::Gender, "M"),
    ("clinic", SlotType::EntityKind, "Location"),
    ("office", SlotType::EntityKind, "Location"),
    ("hospital", SlotType::EntityKind, "Location"),
    ("location", SlotType::EntityKind, "Location"),
    ("facility", SlotType::EntityKind, "Location"),
    ("urgent care", SlotType::EntityKind, "Location"),
    ("per city", SlotType::Modifier, "COUNT_BY_CITY"),
    ("by city", SlotType::Modifier, "COUNT_BY_CITY"),
    ("each city", SlotType::Modifier, "COUNT_BY_CITY"),
    ("every city", SlotType::Modifier, "COUNT_BY_CITY"),
    ("closeness to my city", SlotType::Modifier, "ORDER_BY_DISTANCE"),
];

/// One opening interval; `close` at or before `open` runs past midnight,
/// `close` = 1440 is written as "24:00".
type RawHours = Vec<(Weekday, u16, u16)>;

const H: u16 = 60;

fn weekdays(open: u16, close: u16) -> RawHours {
    Weekday::ALL[..5].iter().map(|&d| (d, open, close)).collect()
}

/// Opening-hours patterns, assigned to locations in rotation. Patterns 2-5
/// include weekend time; pattern 4 reaches Saturday only by running past
/// Friday midnight.
fn hours_pattern(i: usize) -> RawHours {
    use Weekday::*;
    let mut h = match i % 8 {
        0 => weekdays(8 * H, 17 * H),
        1 => weekdays(7 * H, 19 * H),
        2 => {
            let mut h = weekdays(7 * H, 21 * H);
            h.push((Sat, 9 * H, 17 * H));
            h.push((Sun, 9 * H, 17 * H));
            h
        }
        3 => Weekday::ALL.iter().map(|&d| (d, 0, 24 * H)).collect(),
        4 => {
            let mut h: RawHours = Weekday::ALL[..4].iter().map(|&d| (d, 8 * H, 17 * H)).collect();
            h.push((Fri, 20 * H, 3 * H));
            h
        }
        5 => {
            let mut h = weekdays(9 * H, 17 * H);
            h.push((Sun, 10 * H, 14 * H));
            h
        }
        6 => weekdays(12 * H, 20 * H),
        _ => weekdays(10 * H, 19 * H),
    };
    h.sort();
    h
}

fn hhmm(minutes: u16) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthLocation {
    pub id: String,
    pub name: String,
    pub city: String,
    pub geo: GeoPoint,
    pub hours: Vec<RawInterval>,
    pub departments: Vec<String>,
    #[serde(skip)]
    raw_hours: RawHours,
}

/// A generated query with the filter that defines its relevant entities.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub text: String,
    pub class: QueryClass,
    pub target: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QueryClass {
    /// Lay phrasing with no token shared with any document.
    Semantic,
    /// Structured question that also has keyword hits.
    Structured,
    Aggregate,
    NameLookup,
    Unanswerable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Providers {
        specialty: Option<String>,
        window: Option<String>,
        city: Option<String>,
        language: Option<String>,
        gender: Option<Gender>,
    },
    Locations {
        window: Option<String>,
        city: Option<String>,
    },
    None,
}

#[derive(Debug, Clone)]
pub struct Fixtures {
    pub specialties: Vec<SpecialtyRecord>,
    pub locations: Vec<SynthLocation>,
    pub providers: Vec<ProviderRecord>,
    pub queries: Vec<QuerySpec>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty table")
}

fn generate_locations(rng: &mut ChaCha8Rng) -> Vec<SynthLocation> {
    let mut out = Vec::new();
    for (c, &(city, lat, lon, street)) in CITIES.iter().enumerate() {
        for j in 0..2 {
            let i = 2 * c + j;
            let name = if j == 0 {
                format!("{city} Medical Center")
            } else {
                format!("{street} Medical Building")
            };
            let geo = GeoPoint::new(
                round4(lat + rng.gen_range(-0.02..0.02)),
                round4(lon + rng.gen_range(-0.02..0.02)),
            )
            .expect("fixture coordinates are in range");
            let n_departments = rng.gen_range(1..=3);
            let mut departments: Vec<String> = DEPARTMENTS
                .choose_multiple(rng, n_departments)
                .map(|s| s.to_string())
                .collect();
            departments.sort();
            let raw_hours = hours_pattern(i);
            out.push(SynthLocation {
                id: format!("loc-{:02}", i + 1),
                name,
                city: city.to_string(),
                geo,
                hours: raw_hours
                    .iter()
                    .map(|&(day, open, close)| RawInterval {
                        day,
                        open: hhmm(open),
                        close: hhmm(close),
                    })
                    .collect(),
                departments,
                raw_hours,
            });
        }
    }
    out
}

fn generate_providers(rng: &mut ChaCha8Rng, locations: &[SynthLocation]) -> Vec<ProviderRecord> {
    let n_spec = SPECIALTIES.len();
    (0..PROVIDER_COUNT)
        .map(|i| {
            let female = rng.gen_bool(0.5);
            let first = if female { pick(rng, FEMALE_NAMES) } else { pick(rng, MALE_NAMES) };
            let last = pick(rng, LAST_NAMES);
            let gender = if rng.gen_bool(0.03) {
                Gender::X
            } else if female {
                Gender::F
            } else {
                Gender::M
            };
            let primary = if i < 3 * n_spec {
                i % n_spec
            } else {
                match rng.gen_range(0..10) {
                    0..=2 => 0,
                    3..=4 => 17,
                    _ => rng.gen_range(0..n_spec),
                }
            };
            let mut specialties = vec![SPECIALTIES[primary].0.to_string()];
            if rng.gen_bool(0.15) {
                let extra = SPECIALTIES[rng.gen_range(0..n_spec)].0.to_string();
                if !specialties.contains(&extra) {
                    specialties.push(extra);
                }
            }
            let mut languages = vec!["en".to_string()];
            if rng.gen_bool(0.45) {
                languages.push(pick(rng, EXTRA_LANGUAGES).to_string());
            }
            let first_loc = rng.gen_range(0..locations.len());
            let mut locs = vec![locations[first_loc].id.clone()];
            if rng.gen_bool(0.35) {
                let second = rng.gen_range(0..locations.len());
                if locations[second].city != locations[first_loc].city {
                    locs.push(locations[second].id.clone());
                }
            }
            ProviderRecord {
                id: format!("prov-{:04}", i + 1),
                name: format!("{first} {last}"),
                specialties,
                gender: Some(gender),
                languages,
                accepting_new_patients: rng.gen_bool(0.7),
                locations: locs,
            }
        })
        .collect()
}

/// Windows as (day, start, end) minute ranges.
fn window_ranges(window: &str) -> Vec<(Weekday, u16, u16)> {
    use Weekday::*;
    match window {
        "WEEKEND" => vec![(Sat, 0, 24 * H), (Sun, 0, 24 * H)],
        "WEEKDAY" => Weekday::ALL[..5].iter().map(|&d| (d, 0, 24 * H)).collect(),
        "EVENING" => Weekday::ALL.iter().map(|&d| (d, 17 * H, 21 * H)).collect(),
        "Saturday" => vec![(Sat, 0, 24 * H)],
        "Sunday" => vec![(Sun, 0, 24 * H)],
        other => panic!("no window {other}"),
    }
}

/// Whether raw hours (possibly running past midnight) share a positive-length
/// stretch with the window.
fn open_during(hours: &RawHours, window: &str) -> bool {
    let mut pieces = Vec::new();
    for &(day, open, close) in hours {
        if close > open {
            pieces.push((day, open, close));
        } else {
            pieces.push((day, open, 24 * H));
            pieces.push((day.next(), 0, close));
        }
    }
    window_ranges(window).iter().any(|&(wd, ws, we)| {
        pieces
            .iter()
            .any(|&(d, o, c)| d == wd && o.max(ws) < c.min(we))
    })
}

impl Fixtures {
    pub fn generate(seed: u64) -> Fixtures {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specialties = SPECIALTIES
            .iter()
            .enumerate()
            .map(|(i, (name, syn))| SpecialtyRecord {
                id: format!("spec-{:02}", i + 1),
                name: name.to_string(),
                synonyms: syn.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        let locations = generate_locations(&mut rng);
        let providers = generate_providers(&mut rng, &locations);
        let mut fixtures = Fixtures {
            specialties,
            locations,
            providers,
            queries: Vec::new(),
        };
        fixtures.queries = fixtures.generate_queries(&mut rng);
        fixtures
    }

    fn location(&self, id: &str) -> Option<&SynthLocation> {
        self.locations.iter().find(|l| l.id == id)
    }

    /// Every token that can appear in a keyword document.
    pub fn document_tokens(&self) -> BTreeSet<String> {
        let mut texts: Vec<String> = Vec::new();
        for p in &self.providers {
            texts.push(p.name.clone());
            texts.extend(p.specialties.iter().cloned());
            texts.extend(p.languages.iter().map(|c| crate::keyword::language_name(c).to_string()));
        }
        for l in &self.locations {
            texts.push(l.name.clone());
            texts.push(l.city.clone());
            texts.extend(l.departments.iter().cloned());
        }
        texts.iter().flat_map(|t| normalize(t)).collect()
    }

    /// External ids of the entities a query asks for.
    pub fn relevant(&self, target: &Target) -> BTreeSet<String> {
        match target {
            Target::Providers {
                specialty,
                window,
                city,
                language,
                gender,
            } => self
                .providers
                .iter()
                .filter(|p| specialty.as_ref().is_none_or(|s| p.specialties.contains(s)))
                .filter(|p| language.as_ref().is_none_or(|l| p.languages.contains(l)))
                .filter(|p| gender.is_none_or(|g| p.gender == Some(g)))
                .filter(|p| {
                    p.locations.iter().filter_map(|id| self.location(id)).any(|l| {
                        window.as_ref().is_none_or(|w| open_during(&l.raw_hours, w))
                            && city.as_ref().is_none_or(|c| &l.city == c)
                    })
                })
                .map(|p| p.id.clone())
                .collect(),
            Target::Locations { window, city } => self
                .locations
                .iter()
                .filter(|l| window.as_ref().is_none_or(|w| open_during(&l.raw_hours, w)))
                .filter(|l| city.as_ref().is_none_or(|c| &l.city == c))
                .map(|l| l.id.clone())
                .collect(),
            Target::None => BTreeSet::new(),
        }
    }

    fn generate_queries(&self, rng: &mut ChaCha8Rng) -> Vec<QuerySpec> {
        let doc_tokens = self.document_tokens();
        let zero_overlap = |text: &str| normalize(text).iter().all(|t| !doc_tokens.contains(t));
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut out: Vec<QuerySpec> = Vec::new();
        let quotas = [
            (QueryClass::Semantic, 32),
            (QueryClass::Structured, 33),
            (QueryClass::Aggregate, 10),
            (QueryClass::NameLookup, 15),
            (QueryClass::Unanswerable, 10),
        ];
        for (class, quota) in quotas {
            let mut made = 0;
            let mut attempts = 0;
            while made < quota {
                attempts += 1;
                assert!(attempts < 10_000, "query generator stalled on {class:?}");
                let spec = match class {
                    QueryClass::Semantic => self.semantic_query(rng),
                    QueryClass::Structured => self.structured_query(rng),
                    QueryClass::Aggregate => self.aggregate_query(rng),
                    QueryClass::NameLookup => self.name_query(rng),
                    QueryClass::Unanswerable => unanswerable_query(rng),
                };
                let ok = match class {
                    QueryClass::Semantic => zero_overlap(&spec.text) && !self.relevant(&spec.target).is_empty(),
                    QueryClass::Structured => !self.relevant(&spec.target).is_empty(),
                    _ => true,
                };
                if ok && seen.insert(spec.text.clone()) {
                    out.push(spec);
                    made += 1;
                }
            }
        }
        out
    }

    fn lay_surface(&self, rng: &mut ChaCha8Rng) -> (String, String) {
        let (name, syns) = pick(rng, SPECIALTIES);
        let surface = if syns.len() > 1 && rng.gen_bool(0.7) {
            syns[rng.gen_range(1..syns.len())]
        } else {
            syns[0]
        };
        let countable = ["doctor", "specialist", "ist", "ian", "eon"]
            .iter()
            .any(|end| surface.ends_with(end));
        let surface = if rng.gen_bool(0.4) && countable {
            format!("{surface}s")
        } else {
            surface.to_string()
        };
        (name.to_string(), surface)
    }

    fn semantic_query(&self, rng: &mut ChaCha8Rng) -> QuerySpec {
        let (specialty, s) = self.lay_surface(rng);
        let providers = |window: Option<&str>, gender: Option<Gender>| Target::Providers {
            specialty: Some(specialty.clone()),
            window: window.map(str::to_string),
            city: None,
            language: None,
            gender,
        };
        let (text, target) = match rng.gen_range(0..10) {
            0 => (format!("{s} open on the weekend near me"), providers(Some("WEEKEND"), None)),
            1 => (format!("what {s} are open on the weekend near me"), providers(Some("WEEKEND"), None)),
            2 => (format!("{s} near me"), providers(None, None)),
            3 => (format!("{s} open on saturday near me"), providers(Some("Saturday"), None)),
            4 => (format!("{s} open sunday nearby"), providers(Some("Sunday"), None)),
            5 => (format!("{s} open in the evening near me"), providers(Some("EVENING"), None)),
            6 => (format!("{s} nearby"), providers(None, None)),
            7 => (format!("female {s}"), providers(None, Some(Gender::F))),
            8 => (format!("{s} open late"), providers(Some("EVENING"), None)),
            _ => {
                let (text, window) = *pick(
                    rng,
                    &[
                        ("clinic open on sunday", "Sunday"),
                        ("urgent care open on the weekend", "WEEKEND"),
                        ("office open tonight", "EVENING"),
                        ("hospital open saturday", "Saturday"),
                        ("clinic open after work", "EVENING"),
                    ],
                );
                let target = Target::Locations {
                    window: Some(window.to_string()),
                    city: None,
                };
                let near = rng.gen_bool(0.5);
                let text = if near { format!("{text} near me") } else { text.to_string() };
                (text, target)
            }
        };
        QuerySpec {
            text,
            class: QueryClass::Semantic,
            target,
        }
    }

    fn structured_query(&self, rng: &mut ChaCha8Rng) -> QuerySpec {
        let (specialty, _) = pick(rng, SPECIALTIES);
        let formal = specialty.to_lowercase();
        let city = pick(rng, CITIES).0;
        let city_lc = city.to_lowercase();
        let (lang_surface, lang_code) = *pick(rng, LANGUAGE_SURFACES);
        let providers = |window: Option<&str>, city: Option<&str>, language: Option<&str>| Target::Providers {
            specialty: Some(specialty.to_string()),
            window: window.map(str::to_string),
            city: city.map(str::to_string),
            language: language.map(str::to_string),
            gender: None,
        };
        let (text, target) = match rng.gen_range(0..8) {
            0 => (format!("{formal} in {city_lc}"), providers(None, Some(city), None)),
            1 => (format!("{formal} {city_lc}"), providers(None, Some(city), None)),
            2 => (
                format!("{formal} open on the weekend in {city_lc}"),
                providers(Some("WEEKEND"), Some(city), None),
            ),
            3 => (
                format!("{formal} who speak {lang_surface}"),
                providers(None, None, Some(lang_code)),
            ),
            4 => (
                format!("{lang_surface} speaking {formal}"),
                providers(None, None, Some(lang_code)),
            ),
            5 => (formal.clone(), providers(None, None, None)),
            6 => (format!("{formal} near me"), providers(None, None, None)),
            _ => (
                format!("clinics in {city_lc}"),
                Target::Locations {
                    window: None,
                    city: Some(city.to_string()),
                },
            ),
        };
        QuerySpec {
            text,
            class: QueryClass::Structured,
            target,
        }
    }

    fn aggregate_query(&self, rng: &mut ChaCha8Rng) -> QuerySpec {
        let (specialty, lay) = self.lay_surface(rng);
        let noun = if rng.gen_bool(0.5) { lay } else { specialty.to_lowercase() };
        let text = match rng.gen_range(0..3) {
            0 => format!("how many {noun} per city"),
            1 => format!("number of {noun} by city"),
            _ => format!("count {noun} in each city"),
        };
        QuerySpec {
            text,
            class: QueryClass::Aggregate,
            target: Target::None,
        }
    }

    fn name_query(&self, rng: &mut ChaCha8Rng) -> QuerySpec {
        let text = if rng.gen_bool(0.7) {
            pick(rng, &self.providers).name.to_lowercase()
        } else {
            pick(rng, &self.locations).name.to_lowercase()
        };
        QuerySpec {
            text,
            class: QueryClass::NameLookup,
            target: Target::None,
        }
    }

    /// Specialty and city vocabulary for the lexicon file.
    pub fn lexicon_entries(&self) -> Vec<LexiconEntry> {
        let entry = |surface: &str, slot_type: SlotType, canonical: &str| LexiconEntry {
            surface: surface.to_string(),
            slot_type,
            canonical: canonical.to_string(),
        };
        let mut out = Vec::new();
        for &(s, c) in TEMPORAL_SURFACES {
            out.push(entry(s, SlotType::Temporal, c));
        }
        for &(s, c) in LANGUAGE_SURFACES {
            out.push(entry(s, SlotType::Language, c));
        }
        for &(city, ..) in CITIES {
            out.push(entry(&city.to_lowercase(), SlotType::Geo, city));
        }
        for &(s, t, c) in OTHER_LEXICON {
            out.push(entry(s, t, c));
        }
        out
    }

    pub fn labels(&self) -> Vec<(String, BTreeSet<String>)> {
        self.queries
            .iter()
            .map(|q| (q.text.clone(), self.relevant(&q.target)))
            .filter(|(_, ids)| !ids.is_empty())
            .collect()
    }

    /// The generated files, by name.
    pub fn files(&self) -> BTreeMap<&'static str, String> {
        fn jsonl<T: Serialize>(items: &[T]) -> String {
            items
                .iter()
                .map(|i| serde_json::to_string(i).expect("records serialize") + "\n")
                .collect()
        }
        let mut files = BTreeMap::new();
        files.insert("specialties.jsonl", jsonl(&self.specialties));
        files.insert("locations.jsonl", jsonl(&self.locations));
        files.insert("providers.jsonl", jsonl(&self.providers));
        files.insert(
            "lexicon.json",
            serde_json::to_string_pretty(&self.lexicon_entries()).expect("lexicon serializes") + "\n",
        );
        files.insert(
            "queries.txt",
            self.queries.iter().map(|q| format!("{}\n", q.text)).collect(),
        );
        files.insert(
            "labels.tsv",
            self.labels()
                .iter()
                .map(|(q, ids)| format!("{q}\t{}\n", ids.iter().cloned().collect::<Vec<_>>().join(",")))
                .collect(),
        );
        files
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in self.files() {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

fn unanswerable_query(rng: &mut ChaCha8Rng) -> QuerySpec {
    const TEXTS: &[&str] = &[
        "parking validation",
        "billing phone number",
        "insurance questions",
        "visitor policy",
        "flu shot appointment",
        "lost and found",
        "medical records request",
        "hello world",
        "cafeteria menu",
        "job openings",
        "wheelchair access",
        "wifi password",
    ];
    QuerySpec {
        text: pick(rng, TEXTS).to_string(),
        class: QueryClass::Unanswerable,
        target: Target::None,
    }
}
