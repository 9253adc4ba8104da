import math

from rest_framework import serializers

from .models import EmbeddingRecord, Tag, TokenLogProbRecord


def _require_finite(values, field_name):
    if not all(math.isfinite(v) for v in values):
        raise serializers.ValidationError({field_name: "Values must be finite."})


class DatasetHeaderSerializer(serializers.Serializer):
    """Optional first line of a JSONL embedding file."""

    d = serializers.IntegerField(min_value=1)
    layer_tag = serializers.CharField(allow_blank=True, trim_whitespace=False)


class EmbeddingRecordSerializer(serializers.Serializer):
    id = serializers.CharField(trim_whitespace=False)
    y = serializers.IntegerField(allow_null=True, required=False, default=None)
    y_hat = serializers.IntegerField()
    tag = serializers.ChoiceField(choices=[t.value for t in Tag])
    emb = serializers.ListField(child=serializers.FloatField(), allow_empty=False)

    def validate(self, attrs):
        _require_finite(attrs["emb"], "emb")
        return attrs

    def create(self, validated_data):
        return EmbeddingRecord(
            id=validated_data["id"],
            y=validated_data["y"],
            y_hat=validated_data["y_hat"],
            emb=validated_data["emb"],
            tag=Tag(validated_data["tag"]),
        )


class TokenLogProbSerializer(serializers.Serializer):
    id = serializers.CharField(trim_whitespace=False)
    logps = serializers.ListField(
        child=serializers.FloatField(max_value=0.0), allow_empty=False
    )
    tag = serializers.ChoiceField(
        choices=[t.value for t in Tag], required=False, allow_null=True, default=None
    )

    def validate(self, attrs):
        _require_finite(attrs["logps"], "logps")
        return attrs

    def create(self, validated_data):
        tag = validated_data.get("tag")
        return TokenLogProbRecord(
            id=validated_data["id"],
            logps=validated_data["logps"],
            tag=Tag(tag) if tag else None,
        )
