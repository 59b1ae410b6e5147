use dnapix::dna_code::{encode_indices_with, replica_rng, Codebook, D1};
use dnapix::nucleotide::{max_homopolymer_run, reverse_complement, BASES};
use dnapix::oligo::{chunk_and_format, parse_oligo, OligoLayout, Rejection};
use dnapix::Error;
use proptest::prelude::*;
use rand::Rng;

fn random_stream(k: u32, n: usize, seed: u64) -> (Vec<u8>, Vec<u8>) {
    let book = Codebook::new(k).unwrap();
    let mut rng = replica_rng(seed, 100);
    let idx: Vec<u32> = (0..n).map(|_| rng.random_range(1..=k)).collect();
    let nts = encode_indices_with(&idx, &book, &mut replica_rng(seed, 0)).unwrap();
    let mut pad = Vec::new();
    book.push_codeword(1, 0, &mut pad).unwrap();
    (nts, pad)
}

#[test]
fn exact_split() {
    let (nts, pad) = random_stream(10, 73, 1);
    assert_eq!(nts.len(), 146);
    let oligos = chunk_and_format(&nts, 0, &OligoLayout::default(), &pad).unwrap();
    assert_eq!(oligos.iter().map(|o| o.offset).collect::<Vec<_>>(), [0, 1]);
    assert!(oligos.iter().all(|o| o.body.len() == 91));
}

#[test]
fn last_chunk_padding_repeats_index_one() {
    let (nts, pad) = random_stream(10, 40, 2);
    let oligos = chunk_and_format(&nts, 0, &OligoLayout::default(), &pad).unwrap();
    assert_eq!(oligos.len(), 2);
    let tail = &oligos[1].body[17 + 7..90];
    assert!(tail.chunks(2).all(|c| c == pad.as_slice()));
}

#[test]
fn header_fields_are_doublets() {
    let (nts, pad) = random_stream(100, 400, 3);
    let oligos = chunk_and_format(&nts, 42, &OligoLayout::default(), &pad).unwrap();
    for o in &oligos {
        assert_eq!(o.body[0], b'A');
        assert!(o.body[1..17].chunks(2).all(|d| D1.iter().any(|x| x == d)));
        assert_eq!(o.record_id(), format!("42_{}", o.offset));
    }
}

#[test]
fn single_substitution_parity_detection() {
    let layout = OligoLayout::default();
    let (nts, pad) = random_stream(40, 100, 4);
    let body = chunk_and_format(&nts, 5, &layout, &pad).unwrap()[1].body.clone();
    let (mut draws, mut rejected) = (0, 0);
    for pos in 17..90 {
        for &b in &BASES {
            let mut read = body.clone();
            read[pos] = b;
            draws += 1;
            match parse_oligo(&read, &layout) {
                Ok(p) => assert_eq!(p.body, body, "a changed payload was accepted"),
                Err(r) => {
                    assert_eq!(r, Rejection::Parity);
                    rejected += 1;
                }
            }
        }
    }
    assert_eq!(rejected * 4, draws * 3);
}

#[test]
fn address_space_and_id_limits() {
    let layout = OligoLayout { offset_len: 2, ..Default::default() };
    let (nts, pad) = random_stream(10, 73 * 5 + 1, 5);
    assert!(matches!(
        chunk_and_format(&nts, 0, &layout, &pad),
        Err(Error::AddressSpaceExhausted { needed: 11, available: 10 })
    ));
    assert!(matches!(chunk_and_format(&nts[..20], 100, &OligoLayout::default(), &pad), Err(Error::ImageIdTooLarge { .. })));
    assert!(matches!(chunk_and_format(&[], 0, &OligoLayout::default(), &pad), Err(Error::EmptyStream)));
}

#[test]
fn even_body_length_is_refused() {
    let layout = OligoLayout { payload_len: 74, ..Default::default() };
    assert!(matches!(layout.validate(), Err(Error::InvalidLayout(_))));
}

#[test]
fn corpus_homopolymer_scan() {
    let layout = OligoLayout::default();
    for k in [5u32, 10, 11, 40, 41, 100, 101, 400, 1000] {
        let l = Codebook::new(k).unwrap().l();
        let bound = if l.is_multiple_of(2) { 3 } else { 4 };
        for seed in 0..40 {
            let (nts, pad) = random_stream(k, 600, seed);
            for o in chunk_and_format(&nts, 37, &layout, &pad).unwrap() {
                assert!(max_homopolymer_run(&o.body) <= bound, "k={k} l={l}: {}", String::from_utf8_lossy(&o.body));
            }
        }
    }
}

proptest! {
    #[test]
    fn parse_inverts_format(k in 2u32..2000, n in 1usize..300, id in 0u32..100, seed in any::<u64>()) {
        let layout = OligoLayout::default();
        let (nts, pad) = random_stream(k, n, seed);
        let oligos = chunk_and_format(&nts, id, &layout, &pad).unwrap();
        let mut payload = Vec::new();
        for (j, o) in oligos.iter().enumerate() {
            let p = parse_oligo(&o.body, &layout).unwrap();
            prop_assert!(!p.reverse_complemented);
            prop_assert_eq!((p.image_id, p.offset), (id, j as u64));
            payload.extend_from_slice(&p.payload);

            let rc = reverse_complement(&o.body).unwrap();
            let q = parse_oligo(&rc, &layout).unwrap();
            prop_assert!(q.reverse_complemented);
            prop_assert_eq!(&q.body, &o.body);
        }
        prop_assert_eq!(&payload[..nts.len()], nts.as_slice());
    }
}
