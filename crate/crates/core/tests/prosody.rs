mod common;

use chandas::prosody::{weigh, Mode, Weight};
use chandas::script::{syllabify, Phoneme, PhonemeClass, PhonemeSequence, Script};
use proptest::prelude::*;

/// Weights straight from the rule, read off the flat phoneme list.
fn reference(phonemes: &[Phoneme], mode: Mode) -> (Vec<Weight>, bool) {
    let vowels: Vec<usize> = phonemes.iter().enumerate().filter(|(_, p)| p.is_vowel()).map(|(i, _)| i).collect();
    let mut weights = Vec::new();
    let mut determinate = true;
    for (k, &i) in vowels.iter().enumerate() {
        let end = vowels.get(k + 1).copied().unwrap_or(phonemes.len());
        let after = &phonemes[i + 1..end];
        let coda = after.iter().any(|p| p.is_coda());
        let cluster = after.iter().filter(|p| p.is_consonant()).count();
        let long = phonemes[i].class() == PhonemeClass::LongVowel;
        let last = k + 1 == vowels.len();
        let heavy = long || coda || cluster >= 2 || (mode == Mode::Final && last && cluster >= 1);
        weights.push(if heavy { Weight::Guru } else { Weight::Laghu });
        if last && mode == Mode::Streaming {
            determinate = long || coda || cluster >= 2;
        }
    }
    (weights, determinate)
}

fn weights_of(phonemes: &[Phoneme], mode: Mode) -> chandas::prosody::WeightString {
    weigh(
        &syllabify(&PhonemeSequence::from_phonemes(phonemes.iter().copied(), Script::Iast).unwrap()),
        mode,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn matches_the_rule(words in common::words()) {
        let phonemes = words.concat();
        for mode in [Mode::Final, Mode::Streaming] {
            let w = weights_of(&phonemes, mode);
            let (expected, determinate) = reference(&phonemes, mode);
            prop_assert_eq!(&w.weights, &expected);
            prop_assert_eq!(w.last_determinate, determinate);
        }
    }

    #[test]
    fn streaming_agrees_with_final(words in common::words()) {
        let phonemes = words.concat();
        let fin = weights_of(&phonemes, Mode::Final);
        let stream = weights_of(&phonemes, Mode::Streaming);
        prop_assert_eq!(fin.len(), stream.len());
        let n = fin.len();
        if n > 0 {
            prop_assert_eq!(&fin.weights[..n - 1], &stream.weights[..n - 1]);
            if stream.last_determinate {
                prop_assert_eq!(fin.weights[n - 1], stream.weights[n - 1]);
            }
        }
    }

    #[test]
    fn appending_never_changes_settled_weights(a in common::words(), b in common::words()) {
        let head = a.concat();
        let whole: Vec<Phoneme> = head.iter().chain(b.concat().iter()).copied().collect();
        let before = weights_of(&head, Mode::Streaming);
        let after = weights_of(&whole, Mode::Streaming);
        let settled = if before.last_determinate { before.len() } else { before.len().saturating_sub(1) };
        prop_assert_eq!(&after.weights[..settled], &before.weights[..settled]);
        // A guru never turns laghu.
        for (x, y) in before.weights.iter().zip(&after.weights) {
            prop_assert!(!(*x == Weight::Guru && *y == Weight::Laghu));
        }
    }
}
