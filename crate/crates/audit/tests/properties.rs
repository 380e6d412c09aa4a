use dic_audit::envelope::{frame_decode, frame_encode, read_frame, Envelope, Message, MessageType};
use dic_audit::store::Manifest;
use dic_core::protocol::{RejectReason, SchemeId, Verdict};
use proptest::prelude::*;

fn scheme() -> impl Strategy<Value = SchemeId> {
    prop_oneof![Just(SchemeId::Mht), Just(SchemeId::Blinded), Just(SchemeId::Gs)]
}

fn kind() -> impl Strategy<Value = MessageType> {
    proptest::sample::select(MessageType::ALL.to_vec())
}

proptest! {
    #[test]
    fn frames_round_trip(scheme in scheme(), kind in kind(), body in proptest::collection::vec(any::<u8>(), 0..4096)) {
        let env = Envelope::new(scheme, kind, body);
        let frame = frame_encode(&env).unwrap();
        prop_assert_eq!(&frame_decode(&frame).unwrap(), &env);
        prop_assert_eq!(read_frame(&mut frame.as_slice()).unwrap().unwrap(), env);
    }

    #[test]
    fn truncated_frames_never_decode(body in proptest::collection::vec(any::<u8>(), 0..256), cut in any::<prop::sample::Index>()) {
        let frame = frame_encode(&Envelope::new(SchemeId::Gs, MessageType::Response, body)).unwrap();
        let cut = cut.index(frame.len());
        prop_assert!(frame_decode(&frame[..cut]).is_err());
    }

    #[test]
    fn small_messages_round_trip(
        scheme in scheme(),
        name in proptest::collection::vec(any::<u8>(), 0..64),
        text in ".{0,40}",
        n in any::<u64>(),
        reason in proptest::sample::select(RejectReason::ALL.to_vec()),
    ) {
        for msg in [
            Message::GetTag { name: name.clone() },
            Message::UploadAck { name: name.clone() },
            Message::Tag { tag: name.clone(), n },
            Message::Response { proof: name.clone() },
            Message::Verdict(Verdict::Reject(reason)),
            Message::Error { message: text.clone() },
        ] {
            let env = msg.to_envelope(scheme);
            prop_assert_eq!(Message::from_envelope(&frame_decode(&frame_encode(&env).unwrap()).unwrap()).unwrap(), msg);
        }
    }

    #[test]
    fn manifests_round_trip(scheme in scheme(), name in proptest::collection::vec(any::<u8>(), 1..120), blocks in any::<u64>(), auths in any::<u64>()) {
        let m = Manifest { scheme, name, blocks, authenticators: auths };
        prop_assert_eq!(Manifest::parse(m.render().as_bytes()).unwrap(), m);
    }
}
