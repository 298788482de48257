"""Session state machine: screens, catalog cycling, control isolation."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

import meshlens.session as sess
from meshlens import shapes
from meshlens.shapes import box


def catalog():
    return [
        sess.CatalogEntry(name, mesh, category)
        for name, category, mesh in shapes.demo_catalog()
    ]


def fresh(config=None, entries=None):
    state = sess.init_session(config or sess.SessionConfig(),
                              catalog() if entries is None else entries)
    return sess.apply_event(state, sess.GrantCamera())


def test_initial_screen_is_permission_gate():
    state = sess.init_session(sess.SessionConfig(), catalog())
    assert state.screen is sess.Screen.CAMERA_PERMISSION
    assert state.selected == 0  # first model preselected for later


def test_everything_ignored_before_grant():
    state = sess.init_session(sess.SessionConfig(), catalog())
    for event in [sess.NextModel(), sess.EnterAR(), sess.ZoomIn(),
                  sess.RotateX(), sess.MarkerUpdate(None)]:
        after = sess.apply_event(state, event)
        assert after.note == "ignored: camera permission not granted yet"
        assert after.screen is sess.Screen.CAMERA_PERMISSION


def test_grant_moves_to_edit_view_once():
    state = fresh()
    assert state.screen is sess.Screen.EDIT_VIEW
    again = sess.apply_event(state, sess.GrantCamera())
    assert again.note == "ignored: camera already granted"


def test_next_prev_cycle_and_wrap():
    state = fresh()
    names = [e.name for e in state.catalog]
    for expected in names[1:] + names[:1]:
        state = sess.apply_event(state, sess.NextModel())
        assert state.selected_entry.name == expected
    state = sess.apply_event(state, sess.PrevModel())
    assert state.selected_entry.name == names[-1]


def test_category_filter_restricts_cycling():
    state = sess.apply_event(fresh(), sess.SelectCategory("mesh"))
    assert state.category_filter == "mesh"
    assert state.selected_entry.name == "mesh-plate"
    seen = set()
    for _ in range(6):
        seen.add(state.selected_entry.name)
        state = sess.apply_event(state, sess.NextModel())
    assert seen == {"mesh-plate", "mesh-grid", "mesh-grid-fine"}


def test_unknown_category_deselects():
    state = sess.apply_event(fresh(), sess.SelectCategory("engine"))
    assert state.selected is None
    after = sess.apply_event(state, sess.NextModel())
    assert after.note == "ignored: no models to cycle through"


def test_open_folder_clears_selection():
    state = sess.apply_event(fresh(), sess.OpenFolder())
    assert state.selected is None
    assert sess.apply_event(state, sess.ZoomIn()).note == "ignored: no model selected"


def test_upload_appends_selects_and_clears_filter():
    state = sess.apply_event(fresh(), sess.SelectCategory("bar"))
    mesh = box((5.0, 5.0, 5.0))
    state = sess.apply_event(state, sess.UploadModel("part", mesh, "custom"))
    assert state.selected_entry.name == "part"
    assert state.selected == len(state.catalog) - 1
    assert state.category_filter is None


def test_selection_resets_pose_and_recomputes_base():
    state = fresh()
    state = sess.apply_event(state, sess.RotateX())
    state = sess.apply_event(state, sess.ZoomIn())
    state = sess.apply_event(state, sess.NextModel())
    assert state.rot_x == 0.0 and state.zoom == 1.0
    mesh = state.selected_entry.mesh
    lo, hi = mesh.bbox()
    assert state.base_scale == pytest.approx(80.0 / np.max(hi - lo))
    np.testing.assert_allclose(state.base_translation, -0.5 * (lo + hi))


def test_model_switch_preserves_last_yaw():
    state = sess.apply_event(fresh(), sess.EnterAR())
    state = sess.apply_event(state, sess.MarkerUpdate(sess.YawDetection(0.7)))
    state = sess.apply_event(state, sess.EnterEdit())
    state = sess.apply_event(state, sess.NextModel())
    assert state.last_yaw == 0.7
    assert state.transform.rot_y == 0.7


def test_rotation_buttons_step_by_fifteen_degrees():
    state = fresh()
    state = sess.apply_event(state, sess.RotateX(+1))
    state = sess.apply_event(state, sess.RotateX(+1))
    state = sess.apply_event(state, sess.RotateZ(-1))
    assert state.rot_x == pytest.approx(2 * math.pi / 12)
    assert state.rot_z == pytest.approx(-math.pi / 12)
    assert state.last_yaw == 0.0  # buttons never touch yaw


def test_rotate_sign_is_normalized():
    state = sess.apply_event(fresh(), sess.RotateX(sign=5))
    assert state.rot_x == pytest.approx(math.pi / 12)


def test_zoom_clamps_at_both_ends():
    config = sess.SessionConfig()
    state = fresh(config)
    for _ in range(20):
        state = sess.apply_event(state, sess.ZoomIn())
    assert state.zoom == pytest.approx(config.zoom_max)
    for _ in range(40):
        state = sess.apply_event(state, sess.ZoomOut())
    assert state.zoom == pytest.approx(config.zoom_min)


def test_marker_updates_only_in_ar_view():
    state = fresh()
    ignored = sess.apply_event(state, sess.MarkerUpdate(sess.YawDetection(1.0)))
    assert ignored.note == "ignored: marker updates only apply in AR view"
    assert ignored.last_yaw == 0.0

    state = sess.apply_event(state, sess.EnterAR())
    state = sess.apply_event(state, sess.MarkerUpdate(sess.YawDetection(1.0)))
    assert state.marker_visible and state.last_yaw == 1.0


def test_marker_loss_hides_but_keeps_yaw():
    state = sess.apply_event(fresh(), sess.EnterAR())
    state = sess.apply_event(state, sess.MarkerUpdate(sess.YawDetection(2.2)))
    state = sess.apply_event(state, sess.MarkerUpdate(None))
    assert not state.marker_visible
    assert state.last_yaw == 2.2


def test_leaving_ar_hides_marker():
    state = sess.apply_event(fresh(), sess.EnterAR())
    state = sess.apply_event(state, sess.MarkerUpdate(sess.YawDetection(0.4)))
    state = sess.apply_event(state, sess.EnterEdit())
    assert state.screen is sess.Screen.EDIT_VIEW
    assert not state.marker_visible


def test_catalog_actions_blocked_in_ar():
    state = sess.apply_event(fresh(), sess.EnterAR())
    for event in [sess.NextModel(), sess.SelectCategory("bar"),
                  sess.OpenFolder(), sess.UploadModel("x", box((1, 1, 1)))]:
        after = sess.apply_event(state, event)
        assert after.note == "ignored: catalog actions belong to the edit view"
    # posing buttons still work while watching the overlay
    assert sess.apply_event(state, sess.ZoomIn()).zoom > 1.0


def test_true_size_mode_keeps_unit_base_scale():
    config = sess.SessionConfig(scale_mode=sess.ScaleMode.TRUE_SIZE)
    state = fresh(config)
    assert state.base_scale == 1.0
    lo, hi = state.selected_entry.mesh.bbox()
    np.testing.assert_allclose(state.base_translation, -0.5 * (lo + hi))


def test_unrecognized_event_becomes_note():
    state = sess.apply_event(fresh(), "poke")
    assert state.note == "ignored: unrecognized event str"


def test_config_validation():
    with pytest.raises(ValueError):
        sess.SessionConfig(zoom_step=1.0)
    with pytest.raises(ValueError):
        sess.SessionConfig(zoom_min=0.0)
    with pytest.raises(ValueError):
        sess.SessionConfig(zoom_min=2.0, zoom_max=4.0)
    with pytest.raises(ValueError):
        sess.SessionConfig(target_extent=-1.0)


def test_event_serialization_round_trip():
    uploads = {"widget": box((3.0, 2.0, 1.0))}
    events = [
        sess.GrantCamera(),
        sess.SelectCategory("bar"),
        sess.NextModel(),
        sess.PrevModel(),
        sess.OpenFolder(),
        sess.UploadModel("widget", uploads["widget"], "custom"),
        sess.EnterAR(),
        sess.MarkerUpdate(sess.YawDetection(0.25)),
        sess.MarkerUpdate(None),
        sess.EnterEdit(),
        sess.RotateX(-1),
        sess.RotateZ(1),
        sess.ZoomIn(),
        sess.ZoomOut(),
    ]
    payload = json.dumps([sess.event_to_dict(e) for e in events])
    back = [
        sess.event_from_dict(d, uploads.__getitem__)
        for d in json.loads(payload)
    ]
    for original, parsed in zip(events, back):
        assert type(parsed) is type(original)
    assert back[5].mesh is uploads["widget"]
    assert back[7].detection.yaw == 0.25
    assert back[10].sign == -1


def test_upload_deserialization_requires_resolver():
    with pytest.raises(ValueError, match="resolver"):
        sess.event_from_dict({"type": "upload_model", "name": "x"})


def test_unknown_event_type_rejected():
    with pytest.raises(ValueError, match="unknown event type"):
        sess.event_from_dict({"type": "teleport"})


def test_replay_reproduces_state_dict():
    uploads = {"widget": box((3.0, 2.0, 1.0))}
    events = [
        sess.GrantCamera(),
        sess.UploadModel("widget", uploads["widget"], None),
        sess.EnterAR(),
        sess.MarkerUpdate(sess.YawDetection(-0.5)),
        sess.ZoomIn(),
        sess.EnterEdit(),
        sess.RotateZ(1),
    ]
    live = sess.init_session(sess.SessionConfig(), catalog())
    for event in events:
        live = sess.apply_event(live, event)

    script = json.loads(json.dumps([sess.event_to_dict(e) for e in events]))
    replayed = sess.replay(
        sess.SessionConfig(),
        catalog(),
        [sess.event_from_dict(d, uploads.__getitem__) for d in script],
    )
    assert sess.state_to_dict(replayed) == sess.state_to_dict(live)


def test_state_dict_shape():
    state = sess.apply_event(fresh(), sess.ZoomIn())
    d = sess.state_to_dict(state)
    assert d["screen"] == "edit_view"
    assert d["catalog"][0] == "bar-straight"
    assert d["selected"] == "bar-straight"
    assert d["selected_index"] == 0
    assert d["scale_mode"] == "fit_to_target"
    assert d["zoom"] == pytest.approx(1.25)
    assert set(d["transform"]) == {
        "rot_x_rad", "rot_y_rad", "rot_z_rad", "scale", "translation_mm"
    }
    json.dumps(d)  # must be plain JSON types throughout
