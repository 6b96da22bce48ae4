//! Writes a synthetic anuṣṭubh corpus as TSV (`id`, empty English, verse).
//!
//! Verses are random sequences of real Sanskrit word forms, grown word by
//! word under the meter's prefix filter and kept only when the finished verse
//! classifies Full. Usage: `cargo run --example synth_corpus -- [count] [seed]`.

use chandas::decode::Scanner;
use chandas::meter::{classify, MeterSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LEXICON: &str = "
रामः रामेण रामस्य रामम् सीता सीताम् सीतया लक्ष्मणः लक्ष्मणेन भरतः राघवः राघवम्
दशरथः कौसल्या हनूमान् वानरः वानराः राक्षसः राक्षसाः रावणः रावणम् लङ्काम् लङ्का
अयोध्याम् वनम् वने वनात् पर्वतम् पर्वते नदी नदीम् समुद्रम् सागरम् गङ्गा तीरे
धनुः धनुषा बाणम् बाणैः शरैः शरम् रथम् रथे गजः अश्वः सैन्यम् बलम् वीरः वीराः
महाबाहो महाबाहुः महातेजाः महात्मा महात्मनः धर्मात्मा धर्मम् धर्मः सत्यम् सत्येन
तपः तपसा ऋषिः ऋषयः मुनिः मुनयः देवः देवाः देवैः इन्द्रः ब्रह्मा विष्णुः पुत्रः
पुत्रम् पुत्रस्य पिता पितुः माता मातरम् भ्राता भ्रातरम् राजा राजानम् राज्ञः
राज्यम् नृपः नृपतिः प्रजाः जनाः नरः नराः स्त्री भार्या भार्याम् पतिः पतिम् हृदयम्
मनः मनसा वचः वचनम् वाक्यम् उवाच अब्रवीत् प्राह ययौ जगाम ददर्श दृष्ट्वा श्रुत्वा
गत्वा कृत्वा उक्त्वा हत्वा तदा तथा यथा सदा पुनः अथ ततः तत्र यत्र सर्वे सर्वम्
सर्वान् सह च तु हि वै एव इति न मा स सा तम् ताम् तस्य तस्याः तेन तस्मिन् अहम्
त्वम् मम मया मे ते वयम् युद्धे युद्धम् रणे संग्रामे क्रोधम् क्रोधेन शोकम् शोकेन
हर्षेण दुःखम् सुखम् प्रीतः प्रीत्या भयात् भयम् घोरम् घोरः महत् महान् महता शुभम्
शुभे दिव्यम् दिव्याः श्रीमान् धीमान् बलवान् वेगेन शीघ्रम् सहसा मध्ये पुरीम्
नगरम् नगरीम् गृहम् आश्रमम् आश्रमे कानने काननम् वृक्षाः वृक्षम् पुष्पम् फलम्
फलानि मूलम् जलम् जले सलिलम् सूर्यः चन्द्रः रात्रौ दिवा प्रभाते दिशः दिशम् भूमिम्
भूमौ पृथिवीम् आकाशे गगने मार्गे मार्गम् हस्ते हस्तम् शिरः शिरसा नेत्रे नयनम्
वदनम् मुखम् कपयः कपिः सुग्रीवः वाली विभीषणः जटायुः अङ्गदः नीलः जाम्बवान्
विश्वामित्रः वसिष्ठः कैकेयी शत्रुघ्नः जनकः मिथिलाम् शूरः धीरः वीरम् परम् परमम्
उत्तमम् उत्तमः श्रेष्ठः प्रियम् प्रियः प्रिया हितम् वचनात् आज्ञया आज्ञाम् समाहितः
कृताञ्जलिः प्राञ्जलिः विनयात् भक्त्या लोके लोकान् त्रिषु
";

fn verse(spec: &MeterSpec, words: &[&str], rng: &mut ChaCha8Rng) -> Option<String> {
    let half = spec.total_len() / 2;
    let mut scanner = Scanner::new(spec, 0);
    let mut out = String::new();
    let mut split = None;
    let mut order: Vec<&str> = words.to_vec();
    while !scanner.is_complete() {
        if !out.is_empty() {
            scanner.accept(" ").ok()?;
            out.push(' ');
        }
        order.shuffle(rng);
        let word = order.iter().find(|w| scanner.check(w).is_ok())?;
        let mut accepted = true;
        for piece in chandas::lm::aksharas(word) {
            if scanner.accept(&piece).is_err() {
                accepted = false;
                break;
            }
        }
        if !accepted {
            return None;
        }
        out.push_str(word);
        if scanner.syllables() == half {
            split = Some(out.len());
        }
    }
    let split = split?;
    let text = format!("{} ।{} ॥", &out[..split], &out[split..]);
    classify(spec, &text).ok()?.is_full().then_some(text)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(300, |a| a.parse().expect("count"));
    let seed: u64 = args.next().map_or(2024, |a| a.parse().expect("seed"));
    let spec = MeterSpec::anustubh();
    let words: Vec<&str> = LEXICON.split_whitespace().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut made = 0;
    while made < count {
        if let Some(v) = verse(&spec, &words, &mut rng) {
            made += 1;
            println!("syn-{made:04}\t\t{v}");
        }
    }
}
