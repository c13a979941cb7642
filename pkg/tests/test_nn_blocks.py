import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evwave.errors import ParseError, ValidationError
from evwave.nn_blocks import (
    ConvParams,
    DrcbParams,
    RepConvParams,
    channel_concat,
    channel_shuffle,
    channel_split,
    conv2d,
    conv_from_manifest,
    conv_manifest_entries,
    dense_conv_param_count,
    drcb_forward,
    drcb_param_count,
    manifest_dumps,
    manifest_loads,
    read_manifest,
    repconv_forward_deploy,
    repconv_forward_train,
    repconv_from_manifest,
    repconv_fuse,
    repconv_manifest_entries,
    uniform_conv_params,
    uniform_drcb_params,
    uniform_repconv_params,
    wavelet_pool,
    wp_block_forward,
    write_manifest,
)
from oracles import conv2d_oracle, shuffle_permutation


def identity_1x1(channels: int, scale: float = 1.0) -> ConvParams:
    w = np.zeros((channels, channels, 1, 1))
    w[np.arange(channels), np.arange(channels), 0, 0] = scale
    return ConvParams(w)


# --- conv2d ---


def test_conv_1x1_identity():
    x = np.random.default_rng(0).normal(size=(2, 3, 5, 7))
    np.testing.assert_allclose(conv2d(x, identity_1x1(3)), x, rtol=1e-12)


def test_conv_impulse_plateau():
    x = np.zeros((1, 1, 5, 5))
    x[0, 0, 2, 2] = 1.0
    p = ConvParams(np.ones((1, 1, 3, 3)), padding=1)
    out = conv2d(x, p)
    assert out.shape == (1, 1, 5, 5)
    np.testing.assert_array_equal(out[0, 0, 1:4, 1:4], np.ones((3, 3)))
    assert out.sum() == pytest.approx(9.0)


def test_conv_depthwise_scaling():
    c = 4
    x = np.random.default_rng(1).normal(size=(1, c, 4, 4))
    w = np.full((c, 1, 1, 1), 2.0)
    np.testing.assert_allclose(conv2d(x, ConvParams(w, groups=c)), 2.0 * x, rtol=1e-12)


def test_conv_output_shape_formula():
    x = np.zeros((1, 2, 11, 9))
    p = ConvParams(np.zeros((3, 2, 3, 3)), stride=(2, 1), padding=(1, 2))
    # H: (11 + 2 - 3)//2 + 1 = 6 ; W: (9 + 4 - 3)//1 + 1 = 11
    assert conv2d(x, p).shape == (1, 3, 6, 11)


def test_conv_asymmetric_padding_against_oracle():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(1, 2, 6, 5))
    p = uniform_conv_params(rng, 2, 3, 3, stride=(1, 2), padding=(0, 2))
    expected = conv2d_oracle(x, p.weights, p.bias, p.stride, p.padding, p.groups)
    np.testing.assert_allclose(conv2d(x, p), expected, rtol=1e-9, atol=1e-12)


def test_conv_grouped_against_oracle():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2, 6, 5, 5))
    p = uniform_conv_params(rng, 6, 4, 3, padding=1, groups=2)
    expected = conv2d_oracle(x, p.weights, p.bias, p.stride, p.padding, p.groups)
    np.testing.assert_allclose(conv2d(x, p), expected, rtol=1e-9, atol=1e-12)


def test_conv_channel_mismatch_rejected():
    with pytest.raises(ValidationError):
        conv2d(np.zeros((1, 2, 4, 4)), identity_1x1(3))


def test_conv_kernel_larger_than_padded_input():
    with pytest.raises(ValidationError):
        conv2d(np.zeros((1, 1, 2, 2)), ConvParams(np.zeros((1, 1, 3, 3))))


def test_conv_params_validation():
    with pytest.raises(ValidationError):
        ConvParams(np.zeros((2, 1, 3, 3)), bias=np.zeros(3))
    with pytest.raises(ValidationError):
        ConvParams(np.zeros((3, 1, 3, 3)), groups=2)  # 3 % 2 != 0
    with pytest.raises(ValidationError):
        ConvParams(np.zeros((2, 1, 3, 3)), stride=0)
    with pytest.raises(ValidationError):
        ConvParams(np.zeros((2, 1, 3, 3)), padding=-1)


# --- reparameterizable conv ---


def test_repconv_identity_only_is_identity():
    c = 3
    p = RepConvParams(
        branch3x3=ConvParams(np.zeros((c, c, 3, 3)), padding=1),
        branch1x1=ConvParams(np.zeros((c, c, 1, 1))),
        identity_scale=np.ones(c),
    )
    x = np.random.default_rng(4).normal(size=(1, c, 4, 6))
    np.testing.assert_allclose(repconv_forward_train(x, p), x, rtol=1e-12)
    fused = repconv_fuse(p).fused
    expected = np.zeros((c, c, 3, 3))
    expected[np.arange(c), np.arange(c), 1, 1] = 1.0
    np.testing.assert_array_equal(fused.weights, expected)


def test_repconv_1x1_only_center_tap():
    rng = np.random.default_rng(5)
    b1 = uniform_conv_params(rng, 2, 4, 1)
    p = RepConvParams(
        branch3x3=ConvParams(np.zeros((4, 2, 3, 3)), padding=1),
        branch1x1=b1,
    )
    x = rng.normal(size=(1, 2, 5, 5))
    np.testing.assert_allclose(repconv_forward_train(x, p), conv2d(x, b1), rtol=1e-12)
    fused = repconv_fuse(p).fused
    np.testing.assert_array_equal(fused.weights[:, :, 1, 1], b1.weights[:, :, 0, 0])
    assert not fused.weights[:, :, 0, 0].any()


def test_repconv_train_equals_deploy():
    rng = np.random.default_rng(6)
    for _ in range(25):
        c_in = int(rng.integers(1, 6))
        same = bool(rng.integers(0, 2))
        c_out = c_in if same else int(rng.integers(1, 6))
        p = uniform_repconv_params(rng, c_in, c_out, identity=same and c_in == c_out)
        fused = repconv_fuse(p)
        x = rng.normal(size=(2, c_in, int(rng.integers(3, 8)), int(rng.integers(3, 8))))
        train = repconv_forward_train(x, p)
        deploy = repconv_forward_deploy(x, fused)
        np.testing.assert_allclose(deploy, train, rtol=1e-4, atol=1e-12)


def test_repconv_deploy_requires_fuse():
    p = uniform_repconv_params(np.random.default_rng(7), 2)
    with pytest.raises(ValidationError):
        repconv_forward_deploy(np.zeros((1, 2, 4, 4)), p)


def test_repconv_validation():
    ok3 = ConvParams(np.zeros((2, 2, 3, 3)), padding=1)
    ok1 = ConvParams(np.zeros((2, 2, 1, 1)))
    with pytest.raises(ValidationError):  # wrong 1x1 padding
        RepConvParams(ok3, ConvParams(np.zeros((2, 2, 1, 1)), padding=1))
    with pytest.raises(ValidationError):  # identity needs square channels
        RepConvParams(
            ConvParams(np.zeros((3, 2, 3, 3)), padding=1),
            ConvParams(np.zeros((3, 2, 1, 1))),
            identity_scale=np.ones(3),
        )
    with pytest.raises(ValidationError):  # grouped branches unsupported
        RepConvParams(ConvParams(np.zeros((2, 1, 3, 3)), padding=1, groups=2), ok1)
    RepConvParams(ok3, ok1)  # sane combination passes


# --- channel plumbing ---


def test_channel_split_prefix():
    x = np.arange(4)[None, :, None, None] * np.ones((1, 4, 2, 2))
    main, side = channel_split(x)
    assert main.shape[1] == 3 and side.shape[1] == 1
    assert set(np.unique(main[0, :, 0, 0])) == {0.0, 1.0, 2.0}
    assert side[0, 0, 0, 0] == 3.0


def test_channel_split_sizes_c8():
    main, side = channel_split(np.zeros((1, 8, 2, 2)))
    assert main.shape[1] == 6 and side.shape[1] == 2


def test_channel_split_concat_round_trip():
    x = np.random.default_rng(8).normal(size=(2, 12, 3, 3))
    np.testing.assert_array_equal(channel_concat(*channel_split(x)), x)


def test_channel_split_requires_multiple_of_4():
    with pytest.raises(ValidationError):
        channel_split(np.zeros((1, 6, 2, 2)))


def test_channel_shuffle_frozen_order():
    x = np.arange(4)[None, :, None, None] * np.ones((1, 4, 1, 1))
    out = channel_shuffle(x, 2)
    assert list(out[0, :, 0, 0]) == [0.0, 2.0, 1.0, 3.0]


def test_channel_shuffle_groups_1_and_c_are_identity():
    x = np.random.default_rng(9).normal(size=(1, 6, 2, 2))
    np.testing.assert_array_equal(channel_shuffle(x, 1), x)
    np.testing.assert_array_equal(channel_shuffle(x, 6), x)


def test_channel_shuffle_matches_closed_form():
    for c in range(1, 17):
        x = np.arange(c, dtype=float)[None, :, None, None] * np.ones((1, c, 1, 1))
        for g in range(1, c + 1):
            if c % g:
                continue
            out = channel_shuffle(x, g)
            assert list(out[0, :, 0, 0]) == [float(i) for i in shuffle_permutation(c, g)]


@settings(max_examples=40)
@given(st.integers(1, 16), st.integers(1, 16))
def test_channel_shuffle_inverse(c_base, g):
    c = c_base * g  # guarantees divisibility
    x = np.random.default_rng(c * 31 + g).normal(size=(1, c, 2, 2))
    np.testing.assert_array_equal(channel_shuffle(channel_shuffle(x, g), c // g), x)


def test_channel_shuffle_divisibility():
    with pytest.raises(ValidationError):
        channel_shuffle(np.zeros((1, 6, 2, 2)), 4)


# --- split + grouped conv + shuffle block ---


def grouped_identity(channels: int, groups: int) -> ConvParams:
    """Grouped 3x3 whose center taps copy each input channel to itself."""
    cg = channels // groups
    w = np.zeros((channels, cg, 3, 3))
    for o in range(channels):
        w[o, o % cg, 1, 1] = 1.0
    return ConvParams(w, padding=1, groups=groups)


def test_drcb_identity_weights_identity_output():
    c = 16
    p = DrcbParams(
        group_conv=grouped_identity(12, 4),
        pointwise_mix=identity_1x1(12),
        shuffle_groups=1,
    )
    x = np.random.default_rng(10).normal(size=(1, c, 4, 4))
    np.testing.assert_allclose(drcb_forward(x, p), x, rtol=1e-12)


def test_drcb_preserves_shape():
    rng = np.random.default_rng(11)
    p = uniform_drcb_params(rng, 16)
    x = rng.normal(size=(2, 16, 8, 6))
    assert drcb_forward(x, p).shape == x.shape


def test_drcb_side_channels_pass_through_before_shuffle():
    rng = np.random.default_rng(12)
    p = uniform_drcb_params(rng, 16, shuffle_groups=1)
    x = rng.normal(size=(1, 16, 4, 4))
    out = drcb_forward(x, p)
    np.testing.assert_array_equal(out[:, 12:], x[:, 12:])


def test_drcb_param_count_beats_two_dense_convs():
    p = uniform_drcb_params(np.random.default_rng(13), 16, groups=4)
    # 12*3*9+12 = 336 grouped + 12*12+12 = 156 pointwise
    assert drcb_param_count(p) == 492
    assert dense_conv_param_count(16) == 4640
    assert drcb_param_count(p) < dense_conv_param_count(16)


def test_drcb_wrong_width_rejected():
    p = uniform_drcb_params(np.random.default_rng(14), 16)
    with pytest.raises(ValidationError):
        drcb_forward(np.zeros((1, 32, 4, 4)), p)


def test_drcb_params_validation():
    with pytest.raises(ValidationError):  # dense main conv not allowed
        DrcbParams(
            group_conv=ConvParams(np.zeros((12, 12, 3, 3)), padding=1),
            pointwise_mix=identity_1x1(12),
        )
    with pytest.raises(ValidationError):  # pointwise must be 1x1
        DrcbParams(
            group_conv=grouped_identity(12, 4),
            pointwise_mix=ConvParams(np.zeros((12, 12, 3, 3)), padding=1),
        )


# --- conv + pool block ---


def test_wp_block_shortcut_only_is_pooling():
    c = 3
    conv_a = ConvParams(np.zeros((c, c, 3, 3)), padding=1)
    x = np.random.default_rng(15).normal(size=(1, c, 8, 8))
    out = wp_block_forward(x, conv_a, identity_1x1(c))
    np.testing.assert_allclose(out, wavelet_pool(x), rtol=1e-12)


def test_wp_block_halves_spatial_dims():
    rng = np.random.default_rng(16)
    conv_a = uniform_conv_params(rng, 4, 6, 3, padding=1)
    conv_b = uniform_conv_params(rng, 4, 6, 1)
    out = wp_block_forward(rng.normal(size=(1, 4, 32, 32)), conv_a, conv_b)
    assert out.shape == (1, 6, 16, 16)


def test_wp_block_ordering_matters():
    rng = np.random.default_rng(17)
    conv_a = uniform_conv_params(rng, 2, 2, 3, padding=1)
    conv_b = uniform_conv_params(rng, 2, 2, 1)
    x = rng.normal(size=(1, 2, 8, 8))
    ours = wp_block_forward(x, conv_a, conv_b, variant="pool_first")
    conv_first = wp_block_forward(x, conv_a, conv_b, variant="conv_first")
    mixed = wp_block_forward(x, conv_a, conv_b, variant="mixed")
    assert not np.allclose(ours, conv_first)
    assert not np.allclose(ours, mixed)
    assert ours.shape == conv_first.shape == mixed.shape


def test_wp_block_unknown_variant():
    conv_a = ConvParams(np.zeros((2, 2, 3, 3)), padding=1)
    conv_b = ConvParams(np.zeros((2, 2, 1, 1)))
    with pytest.raises(ValidationError):
        wp_block_forward(np.zeros((1, 2, 4, 4)), conv_a, conv_b, variant="nope")


def test_pool_then_conv_matches_strided_conv_shape():
    """Replacing a stride-2 3x3 conv by pool + stride-1 conv keeps the shape."""
    rng = np.random.default_rng(18)
    x = rng.normal(size=(1, 3, 12, 20))
    strided = uniform_conv_params(rng, 3, 5, 3, stride=2, padding=1)
    unstrided = uniform_conv_params(rng, 3, 5, 3, stride=1, padding=1)
    assert conv2d(x, strided).shape == conv2d(wavelet_pool(x), unstrided).shape


# --- weight manifest ---


def test_manifest_round_trip_bit_exact():
    rng = np.random.default_rng(19)
    arrays = {
        "w": rng.normal(size=(2, 3, 3, 3)) * 1e-7,
        "b": np.array([1.0, -0.0, 3.5e300, 7e-300]),
        "scalar": np.float64(0.1),
        "empty_ok": rng.normal(size=(3,)),
    }
    loaded = manifest_loads(manifest_dumps(arrays))
    assert set(loaded) == set(arrays)
    for k, v in arrays.items():
        got = loaded[k]
        assert got.shape == np.asarray(v).shape
        assert np.array_equal(got, np.asarray(v, np.float64))  # bit-exact


def test_manifest_file_round_trip(tmp_path):
    path = tmp_path / "weights.txt"
    arrays = {"k": np.random.default_rng(20).normal(size=(4, 2))}
    write_manifest(path, arrays)
    got = read_manifest(path)
    assert np.array_equal(got["k"], arrays["k"])


def test_manifest_blank_lines_and_comments_ignored():
    text = "# weights below\n\na 1 2\n1 2\n"
    got = manifest_loads(text)
    assert np.array_equal(got["a"], [1.0, 2.0])


def test_manifest_errors():
    with pytest.raises(ParseError):
        manifest_loads("a x\n1\n")  # ndim not an int
    with pytest.raises(ParseError):
        manifest_loads("a 1 3\n1 2\n")  # wrong value count
    with pytest.raises(ParseError):
        manifest_loads("a 1 2\n")  # missing value line
    with pytest.raises(ParseError):
        manifest_loads("a 0\noops\n")  # non-numeric value
    with pytest.raises(ValidationError):
        manifest_dumps({"bad name": np.zeros(1)})


def test_conv_params_manifest_round_trip():
    rng = np.random.default_rng(21)
    p = uniform_conv_params(rng, 4, 6, 3, stride=(2, 1), padding=(1, 2), groups=2)
    q = conv_from_manifest(manifest_loads(manifest_dumps(conv_manifest_entries("c", p))), "c")
    assert np.array_equal(q.weights, p.weights)
    assert np.array_equal(q.bias, p.bias)
    assert (q.stride, q.padding, q.groups) == (p.stride, p.padding, p.groups)


def test_repconv_manifest_round_trip_with_fused():
    rng = np.random.default_rng(22)
    p = repconv_fuse(uniform_repconv_params(rng, 3))
    q = repconv_from_manifest(
        manifest_loads(manifest_dumps(repconv_manifest_entries("r", p))), "r"
    )
    assert np.array_equal(q.branch3x3.weights, p.branch3x3.weights)
    assert np.array_equal(q.identity_scale, p.identity_scale)
    assert q.fused is not None
    assert np.array_equal(q.fused.weights, p.fused.weights)
    x = rng.normal(size=(1, 3, 5, 5))
    np.testing.assert_array_equal(
        repconv_forward_deploy(x, q), repconv_forward_deploy(x, p)
    )


def test_repconv_manifest_without_optional_parts():
    rng = np.random.default_rng(23)
    p = uniform_repconv_params(rng, 2, 4, identity=False)
    q = repconv_from_manifest(
        manifest_loads(manifest_dumps(repconv_manifest_entries("r", p))), "r"
    )
    assert q.identity_scale is None and q.fused is None


def test_conv_manifest_missing_key():
    with pytest.raises(ParseError):
        conv_from_manifest({}, "c")
