use super::parse::{parse, PhonemeSequence, Script, ScriptError, Unit};
use super::phoneme::Phoneme;

/// Writes a parsed sequence in the requested script.
pub fn render(seq: &PhonemeSequence, script: Script) -> String {
    match script {
        Script::Devanagari => render_devanagari(seq.units()),
        Script::Iast => render_iast(seq.units()),
    }
}

/// Converts text between Devanagari and IAST. With `from == to` this checks
/// the text and returns its normalized form.
pub fn transliterate(text: &str, from: Script, to: Script) -> Result<String, ScriptError> {
    Ok(render(&parse(text, from)?, to))
}

fn render_devanagari(units: &[Unit]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < units.len() {
        match units[i] {
            Unit::Separator(sep) => out.push(sep.render(Script::Devanagari)),
            Unit::Phoneme(p) if p.is_consonant() => {
                out.push(p.devanagari());
                match units.get(i + 1) {
                    Some(Unit::Phoneme(v)) if v.is_vowel() => {
                        if let Some(sign) = v.vowel_sign() {
                            out.push(sign);
                        }
                        i += 1;
                    }
                    _ => out.push('्'),
                }
            }
            Unit::Phoneme(p) => out.push(p.devanagari()),
        }
        i += 1;
    }
    out
}

fn render_iast(units: &[Unit]) -> String {
    let mut out = String::new();
    for (i, unit) in units.iter().enumerate() {
        match *unit {
            Unit::Separator(sep) => out.push(sep.render(Script::Iast)),
            Unit::Phoneme(p) => {
                out.push_str(p.iast());
                let next = match units.get(i + 1) {
                    Some(Unit::Phoneme(q)) => Some(*q),
                    _ => None,
                };
                let needs_break = match (p, next) {
                    (Phoneme::A, Some(Phoneme::I | Phoneme::U)) => true,
                    (p, Some(Phoneme::Ha)) => p.takes_aspirate_break(),
                    _ => false,
                };
                if needs_break {
                    out.push(':');
                }
            }
        }
    }
    out
}
