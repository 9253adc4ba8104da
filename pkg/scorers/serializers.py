from rest_framework import serializers


class HmParamsSerializer(serializers.Serializer):
    K = serializers.IntegerField(min_value=1)
    n_s = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(min_value=0)

    def get_fields(self):
        fields = super().get_fields()
        # "lambda" is a Python keyword and cannot be declared as an attribute.
        fields["lambda"] = serializers.FloatField(min_value=0.0, max_value=2.0)
        return fields


class HmClassEntrySerializer(serializers.Serializer):
    label = serializers.IntegerField()
    file = serializers.CharField()
    fit_size = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(min_value=0)


class HmDirectoryManifestSerializer(serializers.Serializer):
    """``manifest.json`` of a class-conditioned halfspace-mass model directory."""

    format = serializers.ChoiceField(choices=["LHM1-dir"])
    version = serializers.IntegerField(min_value=1, max_value=1)
    d = serializers.IntegerField(min_value=1)
    layer_tag = serializers.CharField(allow_blank=True, trim_whitespace=False)
    params = HmParamsSerializer()
    classes = HmClassEntrySerializer(many=True, allow_empty=False)

    def validate_classes(self, value):
        labels = [entry["label"] for entry in value]
        if len(set(labels)) != len(labels):
            raise serializers.ValidationError("Class labels must be unique.")
        return value
