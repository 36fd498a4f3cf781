use std::ffi::{CStr, CString};
use std::ptr;

use epiobs_ffi::*;

fn last_error() -> String {
    let p = epi_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    epi_string_free(p);
    s
}

struct Pair {
    protocol: *mut EpiModel,
    task: *mut EpiModel,
}

impl Drop for Pair {
    fn drop(&mut self) {
        unsafe {
            epi_model_free(self.protocol);
            epi_model_free(self.task);
        }
    }
}

/// One-round IS and consensus over two agents and two values.
unsafe fn consensus() -> Pair {
    let mut input = ptr::null_mut();
    assert_eq!(epi_input_model(2, 2, &mut input), EpiStatus::Ok);
    let (mut is, mut sa) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(epi_gen_is(1, input, &mut is), EpiStatus::Ok);
    assert_eq!(epi_gen_sa(1, input, &mut sa), EpiStatus::Ok);
    let (mut protocol, mut task) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(epi_product_update(input, is, &mut protocol), EpiStatus::Ok);
    assert_eq!(epi_product_update(input, sa, &mut task), EpiStatus::Ok);
    epi_action_free(is);
    epi_action_free(sa);
    epi_model_free(input);
    Pair { protocol, task }
}

#[test]
fn consensus_pipeline_finds_an_obstruction() {
    unsafe {
        let pair = consensus();
        assert_eq!(epi_model_facet_count(pair.protocol), 12);
        assert_eq!(epi_model_facet_count(pair.task), 6);

        let (mut r, mut n) = (ptr::null_mut(), 0usize);
        assert_eq!(
            epi_max_simulation(pair.protocol, pair.task, EpiMode::K, &mut r, &mut n),
            EpiStatus::Ok
        );
        assert!(!epi_relation_is_total(r));
        assert!(n > 0);
        let mut json = ptr::null_mut();
        assert_eq!(epi_relation_to_json(r, &mut json), EpiStatus::Ok);
        assert!(take_string(json).contains("\"dims\""));
        epi_relation_free(r);

        let (mut exists, mut verdict) = (false, ptr::null_mut());
        let st = epi_decide_obstruction(
            pair.protocol,
            pair.task,
            EpiMode::K,
            &mut exists,
            &mut verdict,
        );
        assert_eq!(st, EpiStatus::Ok);
        assert!(exists);
        let verdict = take_string(verdict);
        assert!(verdict.contains("\"phi\": \"(let"), "{verdict}");
    }
}

#[test]
fn formulas_evaluate_through_the_abi() {
    unsafe {
        let pair = consensus();
        let f = CString::new("(or (atom 0 0) (atom 0 1))").unwrap();
        let mut holds = false;
        assert_eq!(
            epi_holds_everywhere(pair.task, f.as_ptr(), &mut holds),
            EpiStatus::Ok
        );
        assert!(holds);
        let g = CString::new("(K 0 (atom 1 0))").unwrap();
        assert_eq!(
            epi_holds_everywhere(pair.protocol, g.as_ptr(), &mut holds),
            EpiStatus::Ok
        );
        assert!(!holds);
        assert_eq!(
            epi_eval_formula(pair.protocol, g.as_ptr(), 0, &mut holds),
            EpiStatus::Ok
        );
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut m = ptr::null_mut();
        let bad = CString::new("{\"agents\": [").unwrap();
        assert_eq!(epi_model_from_json(bad.as_ptr(), &mut m), EpiStatus::Parse);
        assert!(m.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(
            epi_model_from_json(ptr::null(), &mut m),
            EpiStatus::NullArgument
        );
        assert_eq!(
            epi_model_to_json(ptr::null(), ptr::null_mut()),
            EpiStatus::NullArgument
        );

        let pair = consensus();
        let f = CString::new("(K 7 (atom 0 0))").unwrap();
        let mut holds = false;
        assert_eq!(
            epi_holds_everywhere(pair.protocol, f.as_ptr(), &mut holds),
            EpiStatus::Logic
        );
        assert_eq!(
            epi_eval_formula(pair.protocol, f.as_ptr(), 999, &mut holds),
            EpiStatus::Logic
        );

        // a successful call clears the message
        let mut input = ptr::null_mut();
        assert_eq!(epi_input_model(1, 1, &mut input), EpiStatus::Ok);
        assert!(epi_last_error().is_null());
        epi_model_free(input);
    }
}

#[test]
fn json_round_trips_and_knowall_generation() {
    unsafe {
        let mut input = ptr::null_mut();
        assert_eq!(epi_input_model(3, 2, &mut input), EpiStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(epi_model_to_json(input, &mut s), EpiStatus::Ok);
        let text = CString::new(take_string(s)).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(epi_model_from_json(text.as_ptr(), &mut back), EpiStatus::Ok);
        assert_eq!(epi_model_facet_count(back), 8);

        // a directed cycle; self-loops are added
        let edges = [0usize, 1, 1, 2, 2, 0];
        let mut act = ptr::null_mut();
        assert_eq!(
            epi_gen_knowall(edges.as_ptr(), 3, 2, input, &mut act),
            EpiStatus::Ok
        );
        let mut js = ptr::null_mut();
        assert_eq!(epi_action_to_json(act, &mut js), EpiStatus::Ok);
        let js = CString::new(take_string(js)).unwrap();
        let mut act2 = ptr::null_mut();
        assert_eq!(epi_action_from_json(js.as_ptr(), &mut act2), EpiStatus::Ok);
        let mut m = ptr::null_mut();
        assert_eq!(epi_product_update(input, act2, &mut m), EpiStatus::Ok);
        assert_eq!(epi_model_facet_count(m), 8);

        let bad_edges = [0usize, 5];
        let mut none = ptr::null_mut();
        assert_eq!(
            epi_gen_knowall(bad_edges.as_ptr(), 1, 1, input, &mut none),
            EpiStatus::InvalidArgument
        );

        for a in [act, act2] {
            epi_action_free(a);
        }
        for m in [input, back, m] {
            epi_model_free(m);
        }
    }
}

#[test]
fn relation_queries_tolerate_null_and_out_of_range() {
    unsafe {
        assert_eq!(epi_relation_len(ptr::null()), 0);
        assert!(!epi_relation_is_total(ptr::null()));
        assert!(!epi_relation_contains(ptr::null(), 0, 0));
        let pair = consensus();
        let (mut r, mut n) = (ptr::null_mut(), 0usize);
        assert_eq!(
            epi_max_simulation(pair.protocol, pair.task, EpiMode::D, &mut r, &mut n),
            EpiStatus::Ok
        );
        assert!(!epi_relation_contains(r, 1000, 0));
        epi_relation_free(r);
        epi_model_free(ptr::null_mut());
        epi_string_free(ptr::null_mut());
    }
}
