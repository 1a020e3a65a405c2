//! A seeded generator of small synthetic news corpora.
//!
//! It produces three kinds of data from one event model ("who did what to
//! whom, where"):
//!
//! * body-register sentences in the style of a general-purpose English
//!   treebank (determiners, auxiliaries, final punctuation, reduced
//!   relatives, `plans to VERB` clauses, reported speech);
//! * headlines in headline register (no determiners or auxiliaries,
//!   present tense, `X to VERB` for future events, bare passive
//!   participles), with their reference trees;
//! * lead sentences paired with such headlines, where the headline is a
//!   subsequence of the lead sentence.
//!
//! Some lead sentences wrap the event in a matrix verb (`is expected to`,
//! `plans to`) whose removal makes projection promote the subject, so
//! projected trees for those pairs disagree with the reference headline
//! tree, as projected data does in practice.
//!
//! The corpus exists so the examples and tests can run the full pipeline
//! without external data. It is not a stand-in for real treebanks when
//! reporting results.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conllu::{DepTree, Token, Treebank};

struct Verb {
    base: &'static str,
    third: &'static str,
    past: &'static str,
    participle: &'static str,
}

const fn v(
    base: &'static str,
    third: &'static str,
    past: &'static str,
    participle: &'static str,
) -> Verb {
    Verb {
        base,
        third,
        past,
        participle,
    }
}

const VERBS: [Verb; 20] = [
    v("cut", "cuts", "cut", "cut"),
    v("close", "closes", "closed", "closed"),
    v("buy", "buys", "bought", "bought"),
    v("sell", "sells", "sold", "sold"),
    v("raise", "raises", "raised", "raised"),
    v("open", "opens", "opened", "opened"),
    v("win", "wins", "won", "won"),
    v("lose", "loses", "lost", "lost"),
    v("sign", "signs", "signed", "signed"),
    v("approve", "approves", "approved", "approved"),
    v("reject", "rejects", "rejected", "rejected"),
    v("delay", "delays", "delayed", "delayed"),
    v("hire", "hires", "hired", "hired"),
    v("acquire", "acquires", "acquired", "acquired"),
    v("launch", "launches", "launched", "launched"),
    v("ban", "bans", "banned", "banned"),
    v("recall", "recalls", "recalled", "recalled"),
    v("build", "builds", "built", "built"),
    v("sue", "sues", "sued", "sued"),
    v("fine", "fines", "fined", "fined"),
];

const PASSIVE_ONLY: [&str; 8] = [
    "arrested",
    "charged",
    "killed",
    "injured",
    "rescued",
    "elected",
    "sentenced",
    "fired",
];

const SINGLE_NAMES: [&str; 10] = [
    "JPMorgan", "Toyota", "Google", "Boeing", "Nokia", "Siemens", "Pfizer", "Airbus", "Sony",
    "Nestle",
];
const ORG_NAMES: [[&str; 2]; 6] = [
    ["Washington", "Mutual"],
    ["General", "Motors"],
    ["Deutsche", "Bank"],
    ["British", "Airways"],
    ["Royal", "Mail"],
    ["Credit", "Suisse"],
];
const PERSON_NAMES: [[&str; 2]; 6] = [
    ["John", "Smith"],
    ["Angela", "Merkel"],
    ["Will", "Wright"],
    ["Maria", "Lopez"],
    ["David", "Cameron"],
    ["Kofi", "Annan"],
];
const SUBJECT_NOUNS: [&str; 12] = [
    "bank",
    "company",
    "government",
    "police",
    "union",
    "court",
    "city",
    "airline",
    "retailer",
    "man",
    "woman",
    "teacher",
];
const OBJECT_NOUNS: [&str; 12] = [
    "jobs", "shares", "prices", "plant", "factory", "deal", "stake", "contract", "workers",
    "taxes", "rates", "office",
];
const MODIFIER_NOUNS: [&str; 7] = ["oil", "steel", "car", "tech", "food", "health", "energy"];
const NUMBERS: [&str; 7] = ["9,200", "500", "1,000", "30", "120", "two", "three"];
const ADJECTIVES: [&str; 6] = ["new", "struggling", "major", "local", "top", "former"];
const PLACES: [&str; 8] = [
    "Ohio", "Texas", "China", "Moscow", "London", "Paris", "Mexico", "Iraq",
];
const DAYS: [&str; 5] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];
const OBJECTS_OF_DENIAL: [&str; 4] = ["charges", "claims", "report", "allegations"];

#[derive(Clone, Debug)]
enum Head {
    Name(Vec<&'static str>, &'static str),
    Noun(&'static str),
}

#[derive(Clone, Debug)]
struct NounPhrase {
    head: Head,
    det: Option<&'static str>,
    adj: Option<(&'static str, bool)>,
    num: Option<&'static str>,
    compound: Option<&'static str>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Active,
    Future,
    Passive,
}

#[derive(Clone, Debug)]
struct Event {
    subj: NounPhrase,
    verb: usize,
    passive_form: Option<&'static str>,
    obj: Option<NounPhrase>,
    place: Option<&'static str>,
    kind: Kind,
}

/// Tree under construction. Tokens carry a flag telling whether they
/// survive into the headline.
#[derive(Default)]
struct Builder {
    forms: Vec<String>,
    upos: Vec<&'static str>,
    heads: Vec<Option<usize>>,
    rels: Vec<&'static str>,
    keep: Vec<bool>,
}

impl Builder {
    fn push(&mut self, form: &str, upos: &'static str, keep: bool) -> usize {
        self.forms.push(form.to_owned());
        self.upos.push(upos);
        self.heads.push(None);
        self.rels.push("root");
        self.keep.push(keep);
        self.forms.len() - 1
    }

    fn attach(&mut self, dep: usize, head: usize, rel: &'static str) {
        self.heads[dep] = Some(head);
        self.rels[dep] = rel;
    }

    fn capitalize_first(&mut self, headline: bool) {
        let first = if headline {
            self.keep.iter().position(|&k| k).unwrap_or(0)
        } else {
            0
        };
        let f = &mut self.forms[first];
        let mut chars = f.chars();
        if let Some(c) = chars.next() {
            *f = c.to_uppercase().chain(chars).collect();
        }
    }

    fn tree(&self) -> DepTree {
        let tokens = (0..self.forms.len())
            .map(|i| {
                Token::new(
                    i + 1,
                    self.forms[i].clone(),
                    self.upos[i],
                    self.heads[i].map_or(0, |h| h + 1),
                    self.rels[i],
                )
            })
            .collect();
        DepTree::new(tokens, Vec::new())
            .check()
            .expect("generator builds well-formed trees")
    }

    fn kept_forms(&self) -> Vec<String> {
        self.forms
            .iter()
            .zip(&self.keep)
            .filter(|(_, &k)| k)
            .map(|(f, _)| f.clone())
            .collect()
    }
}

/// A lead sentence with its headline tokens and the reference tree for
/// the headline.
#[derive(Clone, Debug)]
pub struct NewsPair {
    pub lead: DepTree,
    pub headline: Vec<String>,
    pub gold_headline: DepTree,
}

pub struct NewsGenerator {
    rng: ChaCha8Rng,
}

impl NewsGenerator {
    pub fn new(seed: u64) -> Self {
        NewsGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        *items.choose(&mut self.rng).unwrap()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn subject(&mut self) -> NounPhrase {
        let r: f64 = self.rng.gen();
        if r < 0.25 {
            NounPhrase {
                head: Head::Name(vec![self.pick(&SINGLE_NAMES)], ""),
                det: None,
                adj: None,
                num: None,
                compound: None,
            }
        } else if r < 0.4 {
            NounPhrase {
                head: Head::Name(self.pick(&ORG_NAMES).to_vec(), "compound"),
                det: None,
                adj: None,
                num: None,
                compound: None,
            }
        } else if r < 0.55 {
            NounPhrase {
                head: Head::Name(self.pick(&PERSON_NAMES).to_vec(), "flat"),
                det: None,
                adj: None,
                num: None,
                compound: None,
            }
        } else {
            let adj = if self.chance(0.4) {
                Some((self.pick(&ADJECTIVES), self.chance(0.3)))
            } else {
                None
            };
            let compound = if self.chance(0.3) {
                Some(self.pick(&MODIFIER_NOUNS))
            } else {
                None
            };
            NounPhrase {
                head: Head::Noun(self.pick(&SUBJECT_NOUNS)),
                det: Some(if self.chance(0.8) { "the" } else { "a" }),
                adj,
                num: None,
                compound,
            }
        }
    }

    fn object(&mut self) -> NounPhrase {
        let num = if self.chance(0.35) {
            Some(self.pick(&NUMBERS))
        } else {
            None
        };
        let adj = if self.chance(0.3) {
            Some((self.pick(&ADJECTIVES), self.chance(0.3)))
        } else {
            None
        };
        let compound = if self.chance(0.3) {
            Some(self.pick(&MODIFIER_NOUNS))
        } else {
            None
        };
        NounPhrase {
            head: Head::Noun(self.pick(&OBJECT_NOUNS)),
            det: if num.is_some() {
                None
            } else {
                Some(if self.chance(0.7) { "the" } else { "its" })
            },
            adj,
            num,
            compound,
        }
    }

    fn event(&mut self, kind: Kind) -> Event {
        let passive_form = if kind == Kind::Passive && self.chance(0.5) {
            Some(self.pick(&PASSIVE_ONLY))
        } else {
            None
        };
        Event {
            subj: self.subject(),
            verb: self.rng.gen_range(0..VERBS.len()),
            passive_form,
            obj: if kind == Kind::Passive || self.chance(0.1) {
                None
            } else {
                Some(self.object())
            },
            place: if self.chance(0.55) {
                Some(self.pick(&PLACES))
            } else {
                None
            },
            kind,
        }
    }

    fn headline_kind(&mut self) -> Kind {
        let r: f64 = self.rng.gen();
        if r < 0.4 {
            Kind::Active
        } else if r < 0.7 {
            Kind::Future
        } else {
            Kind::Passive
        }
    }

    /// One body-register sentence.
    pub fn body_sentence(&mut self) -> DepTree {
        let r: f64 = self.rng.gen();
        let mut b = Builder::default();
        if r < 0.25 {
            let e = self.event(Kind::Active);
            let s = np(&mut b, &e.subj, true);
            let verb = b.push(VERBS[e.verb].past, "VERB", true);
            b.attach(s, verb, "nsubj");
            self.clause_tail(&mut b, &e, verb, true);
        } else if r < 0.37 {
            let e = self.event(Kind::Active);
            let s = np(&mut b, &e.subj, true);
            let aux = b.push("will", "AUX", true);
            let verb = b.push(VERBS[e.verb].base, "VERB", true);
            b.attach(s, verb, "nsubj");
            b.attach(aux, verb, "aux");
            self.clause_tail(&mut b, &e, verb, true);
        } else if r < 0.49 {
            let e = self.event(Kind::Passive);
            let s = np(&mut b, &e.subj, true);
            let aux = b.push("was", "AUX", true);
            let verb = b.push(participle(&e), "VERB", true);
            b.attach(s, verb, "nsubj:pass");
            b.attach(aux, verb, "aux:pass");
            self.clause_tail(&mut b, &e, verb, true);
        } else if r < 0.64 {
            // reduced relative: "the man arrested in Ohio denied the charges"
            let e = self.event(Kind::Passive);
            let s = np(&mut b, &e.subj, true);
            let rel = b.push(participle(&e), "VERB", true);
            b.attach(rel, s, "acl");
            if let Some(place) = e.place {
                pp(&mut b, rel, place, true);
            }
            let verb = b.push(self.pick(&["denied", "rejected", "faced"]), "VERB", true);
            b.attach(s, verb, "nsubj");
            let det = b.push("the", "DET", true);
            let obj = b.push(self.pick(&OBJECTS_OF_DENIAL), "NOUN", true);
            b.attach(det, obj, "det");
            b.attach(obj, verb, "obj");
            let p = b.push(".", "PUNCT", true);
            b.attach(p, verb, "punct");
        } else if r < 0.76 {
            // "the bank announced plans to cut jobs"
            let e = self.event(Kind::Active);
            let s = np(&mut b, &e.subj, true);
            let verb = b.push(
                self.pick(&["announced", "unveiled", "outlined"]),
                "VERB",
                true,
            );
            b.attach(s, verb, "nsubj");
            let det = self.chance(0.3).then(|| b.push("a", "DET", true));
            let noun = b.push(
                if det.is_some() {
                    "plan"
                } else {
                    self.pick(&["plans", "proposals"])
                },
                "NOUN",
                true,
            );
            if let Some(d) = det {
                b.attach(d, noun, "det");
            }
            b.attach(noun, verb, "obj");
            self.infinitive(&mut b, &e, noun);
            let p = b.push(".", "PUNCT", true);
            b.attach(p, verb, "punct");
        } else if r < 0.86 {
            let e = self.event(Kind::Active);
            let said = attribution_first(&mut b, self.pick(&["Officials", "Analysts", "Police"]));
            let s = np(&mut b, &e.subj, true);
            let verb = b.push(VERBS[e.verb].past, "VERB", true);
            b.attach(s, verb, "nsubj");
            b.attach(verb, said, "ccomp");
            self.clause_tail_into(&mut b, &e, verb, said, true);
        } else if r < 0.96 {
            let e = self.event(Kind::Active);
            let s = np(&mut b, &e.subj, true);
            let verb = b.push(VERBS[e.verb].third, "VERB", true);
            b.attach(s, verb, "nsubj");
            self.clause_tail(&mut b, &e, verb, true);
        } else {
            let e = self.event(Kind::Future);
            let s = np(&mut b, &e.subj, true);
            let aux = b.push("is", "AUX", true);
            let to = b.push("to", "PART", true);
            let verb = b.push(VERBS[e.verb].base, "VERB", true);
            b.attach(s, verb, "nsubj");
            b.attach(aux, verb, "aux");
            b.attach(to, verb, "mark");
            self.clause_tail(&mut b, &e, verb, true);
        }
        b.capitalize_first(false);
        b.tree()
    }

    /// `to VERB object [place]` attached as `acl` to `noun`.
    fn infinitive(&mut self, b: &mut Builder, e: &Event, noun: usize) {
        let to = b.push("to", "PART", true);
        let verb = b.push(VERBS[e.verb].base, "VERB", true);
        b.attach(to, verb, "mark");
        b.attach(verb, noun, "acl");
        if let Some(obj) = &e.obj {
            let o = np(b, obj, true);
            b.attach(o, verb, "obj");
        }
        if let Some(place) = e.place {
            pp(b, verb, place, true);
        }
    }

    /// Object, place, optional day and final period for a body clause.
    fn clause_tail(&mut self, b: &mut Builder, e: &Event, verb: usize, body: bool) {
        self.clause_tail_into(b, e, verb, verb, body)
    }

    fn clause_tail_into(
        &mut self,
        b: &mut Builder,
        e: &Event,
        verb: usize,
        root: usize,
        body: bool,
    ) {
        if let Some(obj) = &e.obj {
            let o = np(b, obj, body);
            b.attach(o, verb, "obj");
        }
        if let Some(place) = e.place {
            pp(b, verb, place, true);
        }
        if body && self.chance(0.4) {
            let on = b.push("on", "ADP", false);
            let day = b.push(self.pick(&DAYS), "PROPN", false);
            b.attach(on, day, "case");
            b.attach(day, verb, "obl");
        }
        let p = b.push(".", "PUNCT", false);
        b.attach(p, root, "punct");
    }

    /// Reference tree for a headline reporting `e`.
    fn headline_tree(&mut self, e: &Event) -> DepTree {
        let mut b = Builder::default();
        let s = np(&mut b, &e.subj, false);
        let verb = match e.kind {
            Kind::Active => {
                let v = b.push(VERBS[e.verb].third, "VERB", true);
                b.attach(s, v, "nsubj");
                v
            }
            Kind::Future => {
                let to = b.push("to", "PART", true);
                let v = b.push(VERBS[e.verb].base, "VERB", true);
                b.attach(to, v, "mark");
                b.attach(s, v, "nsubj");
                v
            }
            Kind::Passive => {
                let v = b.push(participle(e), "VERB", true);
                b.attach(s, v, "nsubj:pass");
                v
            }
        };
        if let Some(obj) = &e.obj {
            let o = np(&mut b, obj, false);
            b.attach(o, verb, "obj");
        }
        if let Some(place) = e.place {
            pp(&mut b, verb, place, true);
        }
        b.capitalize_first(true);
        b.tree()
    }

    /// Lead sentence for `e`; its kept tokens spell the headline.
    fn lead(&mut self, e: &Event) -> Builder {
        let mut b = Builder::default();
        let r: f64 = self.rng.gen();
        match e.kind {
            Kind::Active => {
                if r < 0.6 {
                    let s = np(&mut b, &e.subj, true);
                    let v = b.push(VERBS[e.verb].third, "VERB", true);
                    b.attach(s, v, "nsubj");
                    self.lead_tail(&mut b, e, v, v);
                } else {
                    let said = attribution_first(&mut b, self.pick(&["Officials", "Analysts"]));
                    let that = b.push("that", "SCONJ", false);
                    let s = np(&mut b, &e.subj, true);
                    let v = b.push(VERBS[e.verb].third, "VERB", true);
                    b.attach(s, v, "nsubj");
                    b.attach(that, v, "mark");
                    b.attach(v, said, "ccomp");
                    self.lead_tail(&mut b, e, v, said);
                }
            }
            Kind::Future => {
                if r < 0.5 {
                    let s = np(&mut b, &e.subj, true);
                    let is = b.push("is", "AUX", false);
                    let to = b.push("to", "PART", true);
                    let v = b.push(VERBS[e.verb].base, "VERB", true);
                    b.attach(s, v, "nsubj");
                    b.attach(is, v, "aux");
                    b.attach(to, v, "mark");
                    self.lead_tail(&mut b, e, v, v);
                } else if r < 0.7 {
                    let s = np(&mut b, &e.subj, true);
                    let is = b.push("is", "AUX", false);
                    let expected = b.push("expected", "VERB", false);
                    let to = b.push("to", "PART", true);
                    let v = b.push(VERBS[e.verb].base, "VERB", true);
                    b.attach(s, expected, "nsubj:pass");
                    b.attach(is, expected, "aux:pass");
                    b.attach(to, v, "mark");
                    b.attach(v, expected, "xcomp");
                    self.lead_tail(&mut b, e, v, expected);
                } else if r < 0.85 {
                    let s = np(&mut b, &e.subj, true);
                    let plans = b.push("plans", "VERB", false);
                    let to = b.push("to", "PART", true);
                    let v = b.push(VERBS[e.verb].base, "VERB", true);
                    b.attach(s, plans, "nsubj");
                    b.attach(to, v, "mark");
                    b.attach(v, plans, "xcomp");
                    self.lead_tail(&mut b, e, v, plans);
                } else {
                    let said = attribution_first(&mut b, self.pick(&["Officials", "Sources"]));
                    let s = np(&mut b, &e.subj, true);
                    let is = b.push("is", "AUX", false);
                    let to = b.push("to", "PART", true);
                    let v = b.push(VERBS[e.verb].base, "VERB", true);
                    b.attach(s, v, "nsubj");
                    b.attach(is, v, "aux");
                    b.attach(to, v, "mark");
                    b.attach(v, said, "ccomp");
                    self.lead_tail(&mut b, e, v, said);
                }
            }
            Kind::Passive => {
                let s = np(&mut b, &e.subj, true);
                let auxes: Vec<(usize, &'static str)> = if r < 0.7 {
                    vec![(b.push("was", "AUX", false), "aux:pass")]
                } else {
                    vec![
                        (b.push("has", "AUX", false), "aux"),
                        (b.push("been", "AUX", false), "aux:pass"),
                    ]
                };
                let v = b.push(participle(e), "VERB", true);
                for (a, rel) in auxes {
                    b.attach(a, v, rel);
                }
                b.attach(s, v, "nsubj:pass");
                self.lead_tail(&mut b, e, v, v);
            }
        }
        b.capitalize_first(false);
        b
    }

    fn lead_tail(&mut self, b: &mut Builder, e: &Event, verb: usize, root: usize) {
        if let Some(obj) = &e.obj {
            let o = np(b, obj, true);
            b.attach(o, verb, "obj");
        }
        if let Some(place) = e.place {
            pp(b, verb, place, true);
        }
        if self.chance(0.5) {
            let on = b.push("on", "ADP", false);
            let day = b.push(self.pick(&DAYS), "PROPN", false);
            b.attach(on, day, "case");
            b.attach(day, verb, "obl");
        }
        if root == verb && self.chance(0.3) {
            let comma = b.push(",", "PUNCT", false);
            let det = b.push("the", "DET", false);
            let who = b.push(self.pick(&["company", "ministry", "agency"]), "NOUN", false);
            let said = b.push("said", "VERB", false);
            b.attach(det, who, "det");
            b.attach(who, said, "nsubj");
            b.attach(comma, said, "punct");
            b.attach(said, root, "parataxis");
        }
        let p = b.push(".", "PUNCT", false);
        b.attach(p, root, "punct");
    }

    /// A lead sentence, the headline tokens it contains, and the reference
    /// headline tree.
    pub fn news_pair(&mut self) -> NewsPair {
        let kind = self.headline_kind();
        let e = self.event(kind);
        let lead = self.lead(&e);
        let gold_headline = self.headline_tree(&e);
        NewsPair {
            headline: lead.kept_forms(),
            lead: lead.tree(),
            gold_headline,
        }
    }

    /// A reference headline tree for a fresh event.
    pub fn headline(&mut self) -> DepTree {
        let kind = self.headline_kind();
        let e = self.event(kind);
        self.headline_tree(&e)
    }

    pub fn body_treebank(&mut self, name: &str, n: usize) -> Treebank {
        let trees = (0..n)
            .map(|i| {
                self.body_sentence()
                    .with_sent_id(&format!("{}-{}", name, i + 1))
            })
            .collect();
        Treebank::new(name, trees)
    }

    pub fn headline_treebank(&mut self, name: &str, n: usize) -> Treebank {
        let trees = (0..n)
            .map(|i| self.headline().with_sent_id(&format!("{}-{}", name, i + 1)))
            .collect();
        Treebank::new(name, trees)
    }

    pub fn news_pairs(&mut self, name: &str, n: usize) -> Vec<NewsPair> {
        (0..n)
            .map(|i| {
                let mut p = self.news_pair();
                let id = format!("{}-{}", name, i + 1);
                p.lead = p.lead.with_sent_id(&id);
                p.gold_headline = p.gold_headline.with_sent_id(&id);
                p
            })
            .collect()
    }
}

fn participle(e: &Event) -> &'static str {
    e.passive_form.unwrap_or(VERBS[e.verb].participle)
}

/// `<Who> said` at the start of a sentence; returns the verb, which is
/// the root.
fn attribution_first(b: &mut Builder, who: &str) -> usize {
    let w = b.push(who, "NOUN", false);
    let said = b.push("said", "VERB", false);
    b.attach(w, said, "nsubj");
    said
}

fn pp(b: &mut Builder, head: usize, place: &str, keep: bool) {
    let case = b.push("in", "ADP", keep);
    let p = b.push(place, "PROPN", keep);
    b.attach(case, p, "case");
    b.attach(p, head, "obl");
}

/// Push a noun phrase; `full` adds body-register material (determiners,
/// dropped adjectives) flagged as not kept in the headline. Returns the
/// head token.
fn np(b: &mut Builder, phrase: &NounPhrase, full: bool) -> usize {
    let mut mods: Vec<(usize, &'static str)> = Vec::new();
    if full {
        if let Some(det) = phrase.det {
            mods.push((b.push(det, "DET", false), "det"));
        }
    }
    if let Some((adj, keep)) = phrase.adj {
        if full || keep {
            mods.push((b.push(adj, "ADJ", keep), "amod"));
        }
    }
    if let Some(num) = phrase.num {
        mods.push((b.push(num, "NUM", true), "nummod"));
    }
    if let Some(c) = phrase.compound {
        mods.push((b.push(c, "NOUN", true), "compound"));
    }
    let head = match &phrase.head {
        Head::Noun(n) => b.push(n, "NOUN", true),
        Head::Name(parts, rel) => {
            let ids: Vec<usize> = parts.iter().map(|p| b.push(p, "PROPN", true)).collect();
            if *rel == "flat" {
                for &i in &ids[1..] {
                    b.attach(i, ids[0], "flat");
                }
                ids[0]
            } else {
                let last = *ids.last().unwrap();
                for &i in &ids[..ids.len() - 1] {
                    b.attach(i, last, "compound");
                }
                last
            }
        }
    };
    for (m, rel) in mods {
        b.attach(m, head, rel);
    }
    head
}
